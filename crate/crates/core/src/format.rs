//! Plain-text files for site sets and colorings.
//!
//! A point-set file has a header `n R t count` followed by one line of `n`
//! space-separated coordinates per site. A coloring file appends a line
//! `x seed tie_tol` and two lines with the ascending ids of `Q` and of `S`
//! (empty when the set is empty). Floats use Rust's shortest round-trip
//! formatting, so reading a written file reproduces every bit.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::coloring::{Coloring, ColoringConfig};
use crate::error::{Error, Result};
use crate::separated::SeparatedSet;
use crate::torus::TorusSpec;

/// Everything a coloring file stores, before the coloring is assembled.
#[derive(Clone, Debug)]
pub struct ColoringFile {
    pub sites: SeparatedSet,
    pub config: ColoringConfig,
    pub q_bits: Vec<bool>,
    pub s_bits: Vec<bool>,
}

impl ColoringFile {
    pub fn into_coloring(self) -> Result<Coloring> {
        Coloring::from_parts(self.sites, self.config, self.q_bits, self.s_bits)
    }
}

pub fn point_set_to_string(set: &SeparatedSet) -> String {
    let spec = set.spec();
    let mut out = format!("{} {} {} {}\n", spec.n(), spec.period(), set.separation(), set.len());
    for p in set.points() {
        push_joined(&mut out, p.iter());
    }
    out
}

pub fn coloring_to_string(coloring: &Coloring) -> String {
    let mut out = point_set_to_string(coloring.sites());
    let cfg = coloring.config();
    writeln!(out, "{} {} {}", cfg.x, cfg.seed, cfg.tie_tol).unwrap();
    push_joined(&mut out, coloring.q_ids().iter());
    push_joined(&mut out, coloring.s_ids().iter());
    out
}

fn push_joined<T: std::fmt::Display>(out: &mut String, items: impl Iterator<Item = T>) {
    for (i, item) in items.enumerate() {
        if i > 0 {
            out.push(' ');
        }
        write!(out, "{item}").unwrap();
    }
    out.push('\n');
}

/// Line-numbered view of a file.
struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines().enumerate(),
            last: 0,
        }
    }

    fn next_line(&mut self, what: &str) -> Result<(usize, &'a str)> {
        match self.inner.next() {
            Some((i, line)) => {
                self.last = i + 1;
                Ok((i + 1, line))
            }
            None => Err(Error::Parse {
                line: self.last + 1,
                message: format!("unexpected end of file, expected {what}"),
            }),
        }
    }

    fn expect_end(&mut self) -> Result<()> {
        for (i, line) in self.inner.by_ref() {
            if !line.trim().is_empty() {
                return Err(Error::Parse {
                    line: i + 1,
                    message: "trailing content".into(),
                });
            }
        }
        Ok(())
    }
}

fn parse_field<T: FromStr>(line: usize, token: &str, what: &str) -> Result<T> {
    token.parse().map_err(|_| Error::Parse {
        line,
        message: format!("cannot parse {what} from {token:?}"),
    })
}

fn fields<T: FromStr>(line: usize, text: &str, what: &str) -> Result<Vec<T>> {
    text.split_whitespace().map(|tok| parse_field(line, tok, what)).collect()
}

fn read_sites(lines: &mut Lines<'_>) -> Result<SeparatedSet> {
    let (no, header) = lines.next_line("header `n R t count`")?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.len() != 4 {
        return Err(Error::Parse {
            line: no,
            message: format!("header needs 4 fields, found {}", tokens.len()),
        });
    }
    let n: usize = parse_field(no, tokens[0], "dimension")?;
    let period: f64 = parse_field(no, tokens[1], "period")?;
    let t: f64 = parse_field(no, tokens[2], "separation")?;
    let count: usize = parse_field(no, tokens[3], "point count")?;
    let spec = TorusSpec::unrestricted(n, period).map_err(|e| Error::Parse {
        line: no,
        message: e.to_string(),
    })?;
    let mut points = Vec::with_capacity(count);
    for _ in 0..count {
        let (no, line) = lines.next_line("a coordinate line")?;
        let coords: Vec<f64> = fields(no, line, "coordinate")?;
        if coords.len() != n {
            return Err(Error::Parse {
                line: no,
                message: format!("expected {n} coordinates, found {}", coords.len()),
            });
        }
        let point = spec.wrap(&coords).map_err(|e| Error::Parse {
            line: no,
            message: e.to_string(),
        })?;
        points.push(point);
    }
    SeparatedSet::new(spec, t, &points)
}

/// Parse a point-set file. Separation is validated; the covering
/// certificate is not stored and has to be recomputed.
pub fn parse_point_set(text: &str) -> Result<SeparatedSet> {
    let mut lines = Lines::new(text);
    let set = read_sites(&mut lines)?;
    lines.expect_end()?;
    Ok(set)
}

fn id_flags(no: usize, line: &str, count: usize, what: &str) -> Result<Vec<bool>> {
    let ids: Vec<usize> = fields(no, line, what)?;
    let mut flags = vec![false; count];
    for pair in ids.windows(2) {
        if pair[0] >= pair[1] {
            return Err(Error::Parse {
                line: no,
                message: format!("{what} ids must be strictly ascending"),
            });
        }
    }
    for id in ids {
        if id >= count {
            return Err(Error::Parse {
                line: no,
                message: format!("{what} id {id} out of range for {count} sites"),
            });
        }
        flags[id] = true;
    }
    Ok(flags)
}

pub fn parse_coloring(text: &str) -> Result<ColoringFile> {
    let mut lines = Lines::new(text);
    let sites = read_sites(&mut lines)?;
    let (no, line) = lines.next_line("`x seed tie_tol`")?;
    let tokens: Vec<&str> = line.split_whitespace().collect();
    if tokens.len() != 3 {
        return Err(Error::Parse {
            line: no,
            message: format!("expected `x seed tie_tol`, found {} fields", tokens.len()),
        });
    }
    let config = ColoringConfig {
        spec: *sites.spec(),
        t: sites.separation(),
        x: parse_field(no, tokens[0], "x")?,
        seed: parse_field(no, tokens[1], "seed")?,
        tie_tol: parse_field(no, tokens[2], "tie tolerance")?,
    };
    let (no, line) = lines.next_line("the Q id line")?;
    let q_bits = id_flags(no, line, sites.len(), "Q")?;
    let (no, line) = lines.next_line("the S id line")?;
    let s_bits = id_flags(no, line, sites.len(), "S")?;
    if let Some(id) = (0..sites.len()).find(|&i| s_bits[i] && !q_bits[i]) {
        return Err(Error::Parse {
            line: no,
            message: format!("S member {id} is not in Q"),
        });
    }
    lines.expect_end()?;
    Ok(ColoringFile {
        sites,
        config,
        q_bits,
        s_bits,
    })
}

pub fn read_point_set(path: &std::path::Path) -> Result<SeparatedSet> {
    parse_point_set(&std::fs::read_to_string(path)?)
}

pub fn read_coloring(path: &std::path::Path) -> Result<ColoringFile> {
    parse_coloring(&std::fs::read_to_string(path)?)
}

/// Parse `x1,x2,...` into coordinates.
pub fn parse_coordinates(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|tok| {
            tok.trim().parse::<f64>().map_err(|_| Error::Parse {
                line: 1,
                message: format!("cannot parse coordinate {tok:?}"),
            })
        })
        .collect()
}

/// Read a list of points, one per line, as used for target sets. Blank
/// lines and `#` comments are skipped.
pub fn parse_points(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let coords: Vec<f64> = fields(i + 1, &line.replace(',', " "), "coordinate")?;
        if let Some(first) = out.first() {
            if first.len() != coords.len() {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("expected {} coordinates, found {}", first.len(), coords.len()),
                });
            }
        }
        out.push(coords);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::separated::{build_maximal_separated, BuildOptions, SITE_SEPARATION};
    use crate::torus::TorusPoint;
    use proptest::prelude::*;

    #[test]
    fn coloring_round_trip_is_exact() {
        let spec = TorusSpec::new(2, 3.7).unwrap();
        let sites = build_maximal_separated(spec, SITE_SEPARATION, 5, &BuildOptions::default()).unwrap();
        let coloring = Coloring::new(sites, ColoringConfig::new(spec, 5).with_x(0.3)).unwrap();
        let text = coloring_to_string(&coloring);
        let back = parse_coloring(&text).unwrap().into_coloring().unwrap();
        assert_eq!(coloring_to_string(&back), text);
        assert!(coloring.sites().points().eq(back.sites().points()));
        assert_eq!(back.s_ids(), coloring.s_ids());
        assert_eq!(back.config(), coloring.config());
    }

    #[test]
    fn empty_membership_lines() {
        let text = "1 4 1 2\n0\n2\n0.5 7 1e-9\n\n\n";
        let file = parse_coloring(text).unwrap();
        assert!(file.q_bits.iter().all(|&b| !b));
        assert_eq!(file.config.seed, 7);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("1 4 1\n", 1),
            ("1 4 1 2\n0\n", 3),
            ("1 4 1 2\n0\nabc\n", 3),
            ("2 4 1 1\n0\n", 2),
            ("1 4 1 2\n0\n0.5\n", 0),
        ];
        for (text, line) in cases {
            match parse_point_set(text) {
                Err(Error::Parse { line: got, .. }) => assert_eq!(got, line, "{text:?}"),
                Err(Error::NotSeparated { .. }) if line == 0 => {}
                other => panic!("{text:?}: {other:?}"),
            }
        }
        let bad_ids = "1 4 1 2\n0\n2\n0.5 7 1e-9\n1 0\n\n";
        assert!(matches!(parse_coloring(bad_ids), Err(Error::Parse { line: 5, .. })));
        let not_subset = "1 4 1 2\n0\n2\n0.5 7 1e-9\n0\n1\n";
        assert!(matches!(parse_coloring(not_subset), Err(Error::Parse { line: 6, .. })));
    }

    #[test]
    fn coordinate_lists() {
        assert_eq!(parse_coordinates("0.2, -1.5,3").unwrap(), vec![0.2, -1.5, 3.0]);
        assert!(parse_coordinates("1,,2").is_err());
        let pts = parse_points("# a line\n0 0\n1,0\n\n0 2 # top\n").unwrap();
        assert_eq!(pts, vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 2.0]]);
        assert!(parse_points("0 0\n1\n").is_err());
    }

    proptest! {
        #[test]
        fn point_sets_round_trip(
            n in 1usize..4,
            period in 2.0f64..20.0,
            raw in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 3), 1..20),
        ) {
            let spec = TorusSpec::new(n, period).unwrap();
            let pts: Vec<TorusPoint> = raw.iter().map(|p| spec.wrap(&p[..n]).unwrap()).collect();
            // keep a separated subset so construction succeeds
            let coords: Vec<Vec<f64>> = pts.iter().map(|p| p.coords().to_vec()).collect();
            let mut keep: Vec<TorusPoint> = Vec::new();
            for (p, c) in pts.iter().zip(&coords) {
                if keep.iter().all(|k| crate::torus::torus_distance(k.coords(), c, period) >= 0.5) {
                    keep.push(p.clone());
                }
            }
            let set = SeparatedSet::new(spec, 0.5, &keep).unwrap();
            let text = point_set_to_string(&set);
            let back = parse_point_set(&text).unwrap();
            prop_assert!(set.points().eq(back.points()));
            prop_assert_eq!(back.spec(), set.spec());
            prop_assert_eq!(point_set_to_string(&back), text);
        }
    }
}
