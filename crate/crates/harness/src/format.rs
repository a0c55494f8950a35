//! Line-oriented instance files.
//!
//! ```text
//! dsfm-instance 1
//! n 4 r 3
//! unary 0 -1.5e0
//! edge 0 1 2.0e0
//! table 2 2 3 0 1 1 0.5
//! ```
//!
//! Records: `unary id delta`, `edge u v weight`, `square a b c d scale` (ids in
//! cycle order), `region k id_1 .. id_k`, `table k id_1 .. id_k v_0 .. v_{2^k-1}`
//! (bit `j` of the value index selects `id_j`). `#` starts a comment.

use std::fmt::Write as _;
use std::path::Path;

use dsfm_core::potentials::{
    EdgeCutPotential, RegionPotential, SquarePotential, TablePotential, UnaryPotential,
};
use dsfm_core::set_function::check_submodular;
use dsfm_core::{DecomposableInstance, DsfmError, Potential, SetFunction};

use crate::error::{HarnessError, Result};

pub const FORMAT_HEADER: &str = "dsfm-instance";
pub const FORMAT_VERSION: u32 = 1;

/// Tables up to this size are checked for submodularity on load.
pub const TABLE_CHECK_MAX: usize = 12;

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Canonical text form. Custom potentials have no file representation.
pub fn write_instance(inst: &DecomposableInstance) -> Result<String> {
    let mut out = String::new();
    let _ = writeln!(out, "{FORMAT_HEADER} {FORMAT_VERSION}");
    let _ = writeln!(out, "n {} r {}", inst.n(), inst.r());
    for (i, p) in inst.potentials().iter().enumerate() {
        match p {
            Potential::Unary(u) => {
                let _ = writeln!(out, "unary {} {}", u.id(), float(u.delta()));
            }
            Potential::EdgeCut(e) => {
                let (u, v) = e.endpoints();
                let _ = writeln!(out, "edge {u} {v} {}", float(e.weight()));
            }
            Potential::Square(s) => {
                let [a, b, c, d] = s.cycle();
                let _ = writeln!(out, "square {a} {b} {c} {d} {}", float(s.scale()));
            }
            Potential::Region(g) => {
                let ids: Vec<String> = g.support().iter().map(|v| v.to_string()).collect();
                let _ = writeln!(out, "region {} {}", ids.len(), ids.join(" "));
            }
            Potential::Table(t) => {
                let ids: Vec<String> = t.support().iter().map(|v| v.to_string()).collect();
                let vals: Vec<String> = t.values().iter().map(|&v| float(v)).collect();
                let _ = writeln!(
                    out,
                    "table {} {} {}",
                    ids.len(),
                    ids.join(" "),
                    vals.join(" ")
                );
            }
            Potential::Custom(_) => {
                return Err(DsfmError::Capability(format!(
                    "potential {i} is a custom function and cannot be written"
                ))
                .into())
            }
        }
    }
    Ok(out)
}

struct Record<'a> {
    line: usize,
    tokens: Vec<&'a str>,
}

impl Record<'_> {
    fn err(&self, message: impl Into<String>) -> HarnessError {
        HarnessError::Parse {
            line: self.line,
            message: message.into(),
        }
    }

    fn usize_at(&self, k: usize) -> Result<usize> {
        let tok = self
            .tokens
            .get(k)
            .ok_or_else(|| self.err("record is too short"))?;
        tok.parse()
            .map_err(|_| self.err(format!("expected an element id, got '{tok}'")))
    }

    fn f64_at(&self, k: usize) -> Result<f64> {
        let tok = self
            .tokens
            .get(k)
            .ok_or_else(|| self.err("record is too short"))?;
        match tok.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.err(format!("expected a finite number, got '{tok}'"))),
        }
    }

    fn expect_len(&self, len: usize) -> Result<()> {
        if self.tokens.len() != len {
            return Err(self.err(format!(
                "'{}' record takes {} fields, got {}",
                self.tokens[0],
                len - 1,
                self.tokens.len() - 1
            )));
        }
        Ok(())
    }

    fn ids(&self, from: usize, k: usize) -> Result<Vec<usize>> {
        (from..from + k).map(|j| self.usize_at(j)).collect()
    }
}

fn potential_from(rec: &Record) -> Result<Potential> {
    let core = |e: DsfmError| rec.err(e.to_string());
    let pot: Potential = match rec.tokens[0] {
        "unary" => {
            rec.expect_len(3)?;
            UnaryPotential::new(rec.usize_at(1)?, rec.f64_at(2)?).into()
        }
        "edge" => {
            rec.expect_len(4)?;
            EdgeCutPotential::new(rec.usize_at(1)?, rec.usize_at(2)?, rec.f64_at(3)?)
                .map_err(core)?
                .into()
        }
        "square" => {
            rec.expect_len(6)?;
            let ids = rec.ids(1, 4)?;
            SquarePotential::new([ids[0], ids[1], ids[2], ids[3]], rec.f64_at(5)?)
                .map_err(core)?
                .into()
        }
        "region" => {
            let k = rec.usize_at(1)?;
            rec.expect_len(2 + k)?;
            RegionPotential::new(rec.ids(2, k)?).map_err(core)?.into()
        }
        "table" => {
            let k = rec.usize_at(1)?;
            if k > 20 {
                return Err(rec.err(format!("table over {k} elements is too large")));
            }
            rec.expect_len(2 + k + (1 << k))?;
            let ids = rec.ids(2, k)?;
            let values = (0..1usize << k)
                .map(|j| rec.f64_at(2 + k + j))
                .collect::<Result<Vec<_>>>()?;
            let table = TablePotential::new(ids, values).map_err(core)?;
            if k <= TABLE_CHECK_MAX {
                let scale = table.values().iter().fold(1.0f64, |m, v| m.max(v.abs()));
                check_submodular(&table, 1e-9 * scale)?;
            }
            table.into()
        }
        other => return Err(rec.err(format!("unknown record kind '{other}'"))),
    };
    Ok(pot)
}

/// Parses an instance; table potentials with at most [`TABLE_CHECK_MAX`]
/// elements are checked for submodularity.
pub fn read_instance(text: &str) -> Result<DecomposableInstance> {
    let mut records = text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = body.split_whitespace().collect();
        (!tokens.is_empty()).then_some(Record {
            line: i + 1,
            tokens,
        })
    });

    let header = records.next().ok_or(HarnessError::Parse {
        line: 1,
        message: "empty file".into(),
    })?;
    if header.tokens.first() != Some(&FORMAT_HEADER) || header.tokens.len() != 2 {
        return Err(header.err(format!("expected '{FORMAT_HEADER} {FORMAT_VERSION}'")));
    }
    if header.tokens[1] != FORMAT_VERSION.to_string() {
        return Err(header.err(format!("unsupported format version {}", header.tokens[1])));
    }

    let dims = records.next().ok_or(HarnessError::Parse {
        line: header.line + 1,
        message: "missing 'n <n> r <r>' line".into(),
    })?;
    if dims.tokens.len() != 4 || dims.tokens[0] != "n" || dims.tokens[2] != "r" {
        return Err(dims.err("expected 'n <n> r <r>'"));
    }
    let n = dims.usize_at(1)?;
    let r = dims.usize_at(3)?;

    let mut pots = Vec::with_capacity(r);
    let mut last_line = dims.line;
    for rec in records {
        last_line = rec.line;
        if pots.len() == r {
            return Err(rec.err(format!("more than r = {r} potential records")));
        }
        let pot = potential_from(&rec)?;
        if let Some(&bad) = pot.support().iter().find(|&&v| v >= n) {
            return Err(rec.err(format!(
                "element {bad} is outside the ground set of size {n}"
            )));
        }
        pots.push(pot);
    }
    if pots.len() != r {
        return Err(HarnessError::Parse {
            line: last_line,
            message: format!("expected {r} potential records, found {}", pots.len()),
        });
    }
    Ok(DecomposableInstance::new(n, pots)?)
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<DecomposableInstance> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    read_instance(&text)
}

pub fn save_instance(path: impl AsRef<Path>, inst: &DecomposableInstance) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, write_instance(inst)?).map_err(|e| HarnessError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_unary() {
        let inst = read_instance("dsfm-instance 1\nn 1 r 1\nunary 0 -2.5\n").unwrap();
        assert_eq!((inst.n(), inst.r()), (1, 1));
        assert_eq!(inst.evaluate(&[0]).unwrap(), -2.5);
    }

    #[test]
    fn comments_and_blank_lines() {
        let text =
            "# header follows\ndsfm-instance 1\n\nn 3 r 2  # sizes\nedge 0 1 1\nregion 3 0 1 2\n";
        let inst = read_instance(text).unwrap();
        assert_eq!(inst.evaluate(&[0]).unwrap(), 3.0);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = "dsfm-instance 1\nn 2 r 2\nunary 0 1\nedge 0 5 1\n";
        match read_instance(text) {
            Err(HarnessError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        let text = "dsfm-instance 1\nn 2 r 1\nedge 0 1 x\n";
        assert!(matches!(
            read_instance(text),
            Err(HarnessError::Parse { line: 3, .. })
        ));
        assert!(read_instance("dsfm-instance 2\nn 1 r 1\nunary 0 1\n").is_err());
        assert!(read_instance("dsfm-instance 1\nn 2 r 2\nunary 0 1\n").is_err());
    }

    #[test]
    fn supermodular_table_rejected_with_witness() {
        // f(S) = |S|² on two elements: f({0}) + f({1}) < f(∅) + f({0,1}).
        let text = "dsfm-instance 1\nn 2 r 1\ntable 2 0 1 0 1 1 4\n";
        match read_instance(text) {
            Err(HarnessError::Core(DsfmError::NotSubmodular { x, y, violation })) => {
                assert_eq!((x, y), (vec![0], vec![1]));
                assert_eq!(violation, 2.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn canonical_form_is_stable() {
        let text = "dsfm-instance 1\nn 5 r 5\nunary 4 0.1\nedge 0 1 0.3333333333333333\n\
                    square 0 1 3 2 1.4142135623730951\nregion 3 2 3 4\ntable 2 1 4 0 1 2 2.5\n";
        let once = write_instance(&read_instance(text).unwrap()).unwrap();
        let twice = write_instance(&read_instance(&once).unwrap()).unwrap();
        assert_eq!(once, twice);
        assert!(once.contains("edge 0 1 3.3333333333333331e-1"));
    }
}
