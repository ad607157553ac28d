use std::path::Path;

use torus_coloring::adversary::{
    blue_line_search, blue_placement_search, exact_blue_runs_1d, longest_blue_run, red_pair_certificate,
    red_pair_search, KSet,
};
use torus_coloring::bounds::{
    default_sampling_probability, ell_m_feasibility, lemma1_bound, min_k_for_feasibility, theorem_feasibility,
    theorem_feasibility_with_span,
};
use torus_coloring::coloring::{
    filter_s, resample_s_frequency, s_inclusion_probability_exact, sample_q, Coloring, ColoringConfig,
    EXCLUSION_RADIUS,
};
use torus_coloring::format::{coloring_to_string, parse_coordinates, parse_points, read_coloring};
use torus_coloring::separated::{build_maximal_separated, default_pitch, BuildOptions, SeparatedSet, SITE_SEPARATION};
use torus_coloring::voronoi::neighbors_within;
use torus_coloring::{TorusSpec, TAU};

use crate::report::{render, Format, Record};
use crate::{
    BoundsArgs, BuildArgs, ColorArgs, Command, Exact1dArgs, Failure, Outcome, SearchBlueArgs, SearchRedArgs,
    SweepArgs, VerifyArgs, XChoice,
};

pub fn run(command: &Command) -> Result<Outcome, Failure> {
    match command {
        Command::Build(a) => build(a),
        Command::Color(a) => color(a),
        Command::Verify(a) => verify(a),
        Command::SearchRed(a) => search_red(a),
        Command::SearchBlue(a) => search_blue(a),
        Command::Exact1d(a) => exact_1d(a),
        Command::Bounds(a) => bounds(a),
        Command::Sweep(a) => sweep(a),
    }
}

/// Bare answer printed instead of records in text mode.
pub fn plain_text(command: &Command, records: &[Record]) -> Option<String> {
    match command {
        Command::Color(_) => records
            .iter()
            .find(|r| r.kind == "color")
            .and_then(|r| r.fields.iter().find(|(k, _)| k == "color"))
            .and_then(|(_, v)| v.as_str().map(str::to_string)),
        _ => None,
    }
}

fn passed(records: &[Record]) -> bool {
    records.iter().all(|r| r.get_bool("passed").unwrap_or(true))
}

fn load(path: &Path) -> Result<Coloring, Failure> {
    Ok(read_coloring(path)?.into_coloring()?)
}

fn torus_for(n: usize, period: f64, allow_small: bool) -> Result<TorusSpec, Failure> {
    if period <= 2.0 && !allow_small {
        return Err(Failure::usage(format!(
            "R = {period} must exceed 2 (pass --allow-small-R to go down to 5/3)"
        )));
    }
    let spec = if allow_small {
        TorusSpec::relaxed(n, period)
    } else {
        TorusSpec::new(n, period)
    };
    Ok(spec?)
}

/// Largest number of other sites within `2t` of a site.
fn max_close_neighbors(sites: &SeparatedSet) -> usize {
    let reach = 2.0 * sites.separation();
    (0..sites.len())
        .map(|p| neighbors_within(sites.index(), p, reach).len())
        .max()
        .unwrap_or(0)
}

fn lemma_checks(sites: &SeparatedSet) -> (Record, Record) {
    let spec = sites.spec();
    let bound = lemma1_bound(spec.n(), spec.period());
    let count = sites.len() as f64;
    let lemma1 = Record::new("check")
        .field("name", "site-count")
        .field("passed", count <= bound.intermediate && bound.intermediate < bound.final_bound)
        .field("sites", sites.len())
        .num("bound_intermediate", bound.intermediate)
        .num("bound_final", bound.final_bound);
    let limit = 5usize.pow(spec.n() as u32) - 1;
    let most = max_close_neighbors(sites);
    let lemma3 = Record::new("check")
        .field("name", "cell-faces")
        .field("passed", most <= limit)
        .field("max_neighbors_within_2t", most)
        .field("limit", limit);
    (lemma1, lemma3)
}

fn build(a: &BuildArgs) -> Result<Outcome, Failure> {
    let spec = torus_for(a.n, a.period, a.allow_small_r)?;
    let options = BuildOptions {
        strategy: a.strategy,
        ..Default::default()
    };
    let sites = build_maximal_separated(spec, a.t, a.seed, &options)?;
    let mut config = ColoringConfig::new(spec, a.seed);
    config.t = a.t;
    if let Some(x) = a.x {
        config = config.with_x(x);
    }
    let (lemma1, lemma3) = lemma_checks(&sites);
    let cert = sites.certificate().cloned();
    let coloring = Coloring::new(sites, config)?;
    std::fs::write(&a.out, coloring_to_string(&coloring))?;

    let covering = Record::new("check")
        .field("name", "covering")
        .field("passed", cert.as_ref().is_some_and(|c| c.passed()))
        .extend_with(&cert);
    let record = Record::new("build")
        .field("n", a.n)
        .num("R", a.period)
        .num("t", a.t)
        .num("x", config.x)
        .field("x_default", config.uses_default_x())
        .field("seed", a.seed)
        .field("strategy", a.strategy.to_string())
        .field("sites", coloring.sites().len())
        .field("q", coloring.q_ids().len())
        .field("s", coloring.s_ids().len())
        .num("min_s_distance", coloring.min_red_site_distance())
        .num("red_density", coloring.red_density(a.density_samples, a.seed))
        .field("out", a.out.display().to_string());
    let records = vec![record, covering, lemma1, lemma3];
    Ok(Outcome {
        passed: passed(&records),
        records,
    })
}

fn color(a: &ColorArgs) -> Result<Outcome, Failure> {
    let coloring = load(&a.coloring)?;
    let point = parse_coordinates(&a.at)?;
    let c = coloring.color_checked(&point)?;
    Ok(Outcome {
        records: vec![Record::new("color").point("point", &point).field("color", c.to_string())],
        passed: true,
    })
}

fn verify(a: &VerifyArgs) -> Result<Outcome, Failure> {
    let file = read_coloring(&a.coloring)?;
    let mut sites = file.sites;
    let t = sites.separation();
    let n = sites.spec().n();
    let mut records = Vec::new();

    let min_distance = sites.min_pairwise_distance();
    records.push(
        Record::new("check")
            .field("name", "separation")
            .field("passed", min_distance >= t - TAU)
            .num("min_distance", min_distance)
            .num("t", t),
    );
    let cert = sites.certify(a.pitch.unwrap_or_else(|| default_pitch(t, n)), a.refine_depth)?;
    records.push(
        Record::new("check")
            .field("name", "covering")
            .field("passed", cert.passed())
            .extend_with(&cert),
    );
    let (lemma1, lemma3) = lemma_checks(&sites);
    records.push(lemma1);
    records.push(lemma3);

    let reproducible = file.q_bits == sample_q(sites.len(), &file.config)
        && file.s_bits == filter_s(&sites, &file.q_bits);
    let coloring = Coloring::from_parts(sites, file.config, file.q_bits, file.s_bits)?;
    let min_s = coloring.min_red_site_distance();
    records.push(
        Record::new("check")
            .field("name", "s-separation")
            .field("passed", min_s > EXCLUSION_RADIUS + TAU)
            .field("s", coloring.s_ids().len())
            .num("min_s_distance", min_s),
    );
    let red = red_pair_certificate(&coloring)?;
    records.push(
        Record::new("check")
            .field("name", "red-pair")
            .field("passed", red.passed())
            .field("covering_passed", red.covering_passed)
            .field("separation_passed", red.separation_passed)
            .field("period_passed", red.period_passed)
            .field("closest_red_sites", crate::report::to_value(&red.closest_red_sites))
            .field("failures", red.failures().join("; ")),
    );
    let all = passed(&records);
    records.push(
        Record::new("verify")
            .field("passed", all)
            .field("sampling_matches_seed", reproducible)
            .field("x_default", coloring.config().x == default_sampling_probability(n)),
    );
    Ok(Outcome { records, passed: all })
}

fn search_red(a: &SearchRedArgs) -> Result<Outcome, Failure> {
    let coloring = load(&a.coloring)?;
    let found = red_pair_search(&coloring, a.trials, a.seed);
    let mut record = Record::new("search-red")
        .field("trials", a.trials)
        .field("seed", a.seed)
        .field("found", found.is_some())
        .field("passed", found.is_none());
    if let Some(pair) = &found {
        record = record
            .point("first", &pair.first)
            .point("second", &pair.second)
            .num("distance", pair.distance)
            .field("trial", pair.trial);
    }
    Ok(Outcome {
        passed: found.is_none(),
        records: vec![record],
    })
}

fn search_blue(a: &SearchBlueArgs) -> Result<Outcome, Failure> {
    let coloring = load(&a.coloring)?;
    let base = Record::new("search-blue").field("trials", a.trials).field("seed", a.seed);
    let record = if let Some(path) = &a.k {
        let k = KSet::new(parse_points(&std::fs::read_to_string(path)?)?)?;
        let found = blue_placement_search(&coloring, &k, a.trials, a.seed)?;
        let mut r = base
            .field("target", "set")
            .field("k", k.len())
            .num("diameter", k.diameter())
            .field("found", found.is_some());
        if let Some(p) = found {
            let rows: Vec<serde_json::Value> = p
                .rotation
                .iter()
                .map(|row| serde_json::Value::Array(row.iter().map(|&c| crate::report::float(c)).collect()))
                .collect();
            r = r.field("rotation", rows).point("translation", &p.translation);
        }
        r
    } else if a.longest {
        let m = longest_blue_run(&coloring, a.trials, a.seed, a.m_max);
        base.field("target", "longest-line")
            .field("m_max", a.m_max)
            .field("longest_blue_run", m)
    } else {
        let m = a.m.ok_or_else(|| Failure::usage("--m is required"))?;
        let found = blue_line_search(&coloring, m, a.trials, a.seed)?;
        let mut r = base.field("target", "line").field("m", m).field("found", found.is_some());
        if let Some(line) = found {
            r = r.point("base", &line.base).point("direction", &line.direction);
        }
        r
    };
    Ok(Outcome {
        records: vec![record],
        passed: true,
    })
}

fn exact_1d(a: &Exact1dArgs) -> Result<Outcome, Failure> {
    let coloring = load(&a.coloring)?;
    let arcs = coloring.red_arcs_1d()?;
    let run = exact_blue_runs_1d(&coloring, a.m_cap)?;
    let mut records = vec![Record::new("exact-1d")
        .num("R", coloring.spec().period())
        .field("red_arcs", arcs.len())
        .num("red_measure", coloring.exact_red_measure_1d()?)
        .field("longest_blue_run", run.to_string())];
    records.extend(
        arcs.iter()
            .map(|&(start, len)| Record::new("arc").num("start", start).num("length", len)),
    );
    Ok(Outcome { records, passed: true })
}

fn bounds(a: &BoundsArgs) -> Result<Outcome, Failure> {
    let record = if let Some(m) = a.ell_m {
        let rep = ell_m_feasibility(a.n, m)?;
        Record::new("ell-m")
            .num("m", m)
            .extend_with(&rep)
            .num("union_bound_exponent", rep.union_bound_exponent())
    } else {
        let period = a.period.ok_or_else(|| Failure::usage("--R is required"))?;
        if a.min_k {
            Record::new("min-k").extend_with(&min_k_for_feasibility(a.n, period)?)
        } else {
            let k = a.k_size.ok_or_else(|| Failure::usage("one of --K, --min-k or --ell-m is required"))?;
            let rep = match a.d {
                Some(d) => theorem_feasibility_with_span(a.n, period, k, d)?,
                None => theorem_feasibility(a.n, period, k)?,
            };
            Record::new("feasibility")
                .extend_with(&rep)
                .num("union_bound_exponent", rep.union_bound_exponent())
        }
    };
    let site_bound = lemma1_bound(a.n, a.period.or(a.ell_m).unwrap_or(2.0));
    let record = record
        .num("site_bound_intermediate", site_bound.intermediate)
        .num("site_bound_final", site_bound.final_bound);
    Ok(Outcome {
        records: vec![record],
        passed: true,
    })
}

fn sweep_cell(a: &SweepArgs, n: usize, period: f64, x: XChoice, seed: u64) -> Result<Record, Failure> {
    let spec = torus_for(n, period, false)?;
    let options = BuildOptions {
        strategy: a.strategy,
        ..Default::default()
    };
    let sites = build_maximal_separated(spec, SITE_SEPARATION, seed, &options)?;
    let mut config = ColoringConfig::new(spec, seed);
    if let XChoice::Value(x) = x {
        config = config.with_x(x);
    }
    let (lemma1, lemma3) = lemma_checks(&sites);
    let s_exact_0 = s_inclusion_probability_exact(&sites, config.x, 0);
    let s_mc_0 = resample_s_frequency(&sites, &config, 0, a.resample_trials);
    let s_exact_mean =
        (0..sites.len()).map(|p| s_inclusion_probability_exact(&sites, config.x, p)).sum::<f64>() / sites.len() as f64;
    let covering = sites.certificate().is_some_and(|c| c.passed());
    let coloring = Coloring::new(sites, config)?;
    let red = red_pair_certificate(&coloring)?;
    let run = longest_blue_run(&coloring, a.trials, seed, a.m_max);
    let exact = if n == 1 {
        exact_blue_runs_1d(&coloring, (a.m_max as u64).max(1_000_000))?.to_string()
    } else {
        String::new()
    };
    Ok(Record::new("cell")
        .field("n", n)
        .num("R", period)
        .num("x", config.x)
        .field("x_default", config.uses_default_x())
        .field("seed", seed)
        .field("strategy", a.strategy.to_string())
        .field("sites", coloring.sites().len())
        .field("q", coloring.q_ids().len())
        .field("s", coloring.s_ids().len())
        .num("min_s_distance", coloring.min_red_site_distance())
        .num("red_density", coloring.red_density(a.density_samples, seed))
        .num("s_prob_exact_site0", s_exact_0)
        .num("s_prob_mc_site0", s_mc_0)
        .num("s_prob_exact_mean", s_exact_mean)
        .field("longest_blue_run", run)
        .field("exact_blue_run", exact)
        .field("covering_passed", covering)
        .field("red_pair_passed", red.passed())
        .field("site_count_passed", lemma1.get_bool("passed").unwrap_or(false))
        .field("cell_faces_passed", lemma3.get_bool("passed").unwrap_or(false)))
}

fn sweep(a: &SweepArgs) -> Result<Outcome, Failure> {
    for &n in &a.n {
        for &period in &a.period {
            torus_for(n, period, false)?;
        }
    }
    let mut records = Vec::new();
    for &n in &a.n {
        for &period in &a.period {
            for &x in &a.x {
                for &seed in &a.seed {
                    records.push(sweep_cell(a, n, period, x, seed)?);
                }
            }
        }
    }
    if let Some(path) = &a.out {
        let mut file = std::fs::File::create(path)?;
        render(&records, Format::Csv, &mut file)?;
    }
    Ok(Outcome { records, passed: true })
}
