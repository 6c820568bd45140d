//! Line-oriented description files for realizations and energy models, and
//! the decimal real formatting shared with the CLI reports.
//!
//! The format is `key = value`, one pair per line; `#` starts a comment and
//! blank lines are ignored. Real numbers are written with 17 significant
//! digits, which round-trips every binary double bit-exactly. Lists are
//! comma-separated.
//!
//! Realization files (`parse_realization`):
//!
//! ```text
//! family = matrix_monoid        # or algebra_monoid, half_space_add,
//!                               # half_line_mul, trivial_category,
//!                               # order_category, entropy_category,
//!                               # action_category
//! n = 3                         # size key: matrix side, algebra dimension,
//!                               # half-space dimension, entropy chart width
//! dim_x = 1                     # base dimension (trivial_category,
//!                               # action_category)
//! structure_constants = ...     # algebra_monoid: d^3 reals, index
//!                               # (i*d + j)*d + k  for e_i e_j -> e_k
//! unit_coords = ...             # algebra_monoid: d reals
//! action = scale                # action_category: scale | matrix_apply
//! inner.family = ...            # fibre/acting monoid of trivial_category
//!                               # and action_category (monoid families
//!                               # only, with their own keys under inner.)
//! ```
//!
//! Energy model files (`parse_energy_model`): `energies` (list of n+1
//! reals), `temperature`, and optional `boltzmann` (default 1).

use crate::categories::{ActionKind, AlgebraSpec, Realization};
use crate::error::{Error, Result};
use crate::thermo::EnergyModel;
use std::collections::BTreeMap;

/// Format a real with 17 significant digits; parsing the result recovers
/// the same binary double.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Format a list of reals, comma-separated, 17 significant digits each.
pub fn format_real_list(xs: &[f64]) -> String {
    xs.iter()
        .map(|x| format_real(*x))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Parse one finite real.
pub fn parse_real(s: &str) -> Result<f64> {
    let v: f64 = s.trim().parse().map_err(|_| Error::Parse {
        detail: format!("`{}` is not a real number", s.trim()),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            detail: format!("`{}` is not finite", s.trim()),
        });
    }
    Ok(v)
}

/// Parse a non-empty comma-separated list of finite reals.
pub fn parse_real_list(s: &str) -> Result<Vec<f64>> {
    if s.trim().is_empty() {
        return Err(Error::Parse {
            detail: "expected a comma-separated list of reals, got nothing".into(),
        });
    }
    s.split(',').map(parse_real).collect()
}

/// Parse a non-negative integer count.
pub fn parse_count(s: &str) -> Result<usize> {
    s.trim().parse().map_err(|_| Error::Parse {
        detail: format!("`{}` is not a count", s.trim()),
    })
}

/// Split `key = value` lines into a map; `#` comments and blank lines are
/// skipped, duplicate keys rejected.
fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            detail: format!("line {}: expected `key = value`, got `{line}`", idx + 1),
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() {
            return Err(Error::Parse {
                detail: format!("line {}: empty key", idx + 1),
            });
        }
        if map.insert(key.clone(), value).is_some() {
            return Err(Error::Parse {
                detail: format!("line {}: duplicate key `{key}`", idx + 1),
            });
        }
    }
    Ok(map)
}

/// A consuming view on the key-value map so leftovers can be reported.
struct Fields {
    map: BTreeMap<String, String>,
}

impl Fields {
    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn require(&mut self, key: &str) -> Result<String> {
        self.take(key).ok_or_else(|| Error::Parse {
            detail: format!("missing required key `{key}`"),
        })
    }

    fn require_count(&mut self, key: &str) -> Result<usize> {
        parse_count(&self.require(key)?)
    }

    fn finish(self) -> Result<()> {
        if let Some(key) = self.map.keys().next() {
            return Err(Error::Parse {
                detail: format!("unknown key `{key}`"),
            });
        }
        Ok(())
    }
}

/// Parse a realization description. The realization constructors run their
/// own validation (algebra associativity, action/monoid pairing, ...), so a
/// successful parse is a valid realization.
pub fn parse_realization(text: &str) -> Result<Realization> {
    let mut fields = Fields {
        map: parse_key_values(text)?,
    };
    let realization = build_realization(&mut fields, "")?;
    fields.finish()?;
    Ok(realization)
}

fn build_realization(fields: &mut Fields, prefix: &str) -> Result<Realization> {
    let key = |name: &str| format!("{prefix}{name}");
    let family = fields.require(&key("family"))?;
    match family.as_str() {
        "matrix_monoid" => {
            let n = parse_count(&fields.require(&key("n"))?)?;
            Realization::matrix_monoid(n)
        }
        "algebra_monoid" => {
            let n = parse_count(&fields.require(&key("n"))?)?;
            let structure = parse_real_list(&fields.require(&key("structure_constants"))?)?;
            let unit = parse_real_list(&fields.require(&key("unit_coords"))?)?;
            Ok(Realization::algebra_monoid(AlgebraSpec::new(
                n, structure, unit,
            )?))
        }
        "half_space_add" => {
            let n = parse_count(&fields.require(&key("n"))?)?;
            Realization::half_space_add(n)
        }
        "half_line_mul" => Ok(Realization::half_line_mul()),
        "trivial_category" => {
            let dim_x = fields.require_count(&key("dim_x"))?;
            let inner = build_realization(fields, &format!("{prefix}inner."))?;
            Realization::trivial_category(dim_x, inner)
        }
        "order_category" => Ok(Realization::order_category()),
        "entropy_category" => {
            let n = parse_count(&fields.require(&key("n"))?)?;
            Realization::entropy_category(n)
        }
        "action_category" => {
            let action = ActionKind::from_name(&fields.require(&key("action"))?)?;
            let dim_x = fields.require_count(&key("dim_x"))?;
            let inner = build_realization(fields, &format!("{prefix}inner."))?;
            Realization::action_category(inner, action, dim_x)
        }
        other => Err(Error::Parse {
            detail: format!("unknown family `{other}`"),
        }),
    }
}

/// Write a realization description that `parse_realization` reconstructs
/// bit-exactly.
pub fn write_realization(c: &Realization) -> String {
    let mut out = String::new();
    write_realization_fields(c, "", &mut out);
    out
}

fn write_realization_fields(c: &Realization, prefix: &str, out: &mut String) {
    use std::fmt::Write;
    let _ = writeln!(out, "{prefix}family = {}", c.family_name());
    match c {
        Realization::MatrixMonoid { n } => {
            let _ = writeln!(out, "{prefix}n = {n}");
        }
        Realization::AlgebraMonoid { algebra } => {
            let _ = writeln!(out, "{prefix}n = {}", algebra.dim());
            let _ = writeln!(
                out,
                "{prefix}structure_constants = {}",
                format_real_list(algebra.structure())
            );
            let _ = writeln!(
                out,
                "{prefix}unit_coords = {}",
                format_real_list(algebra.unit())
            );
        }
        Realization::HalfSpaceAdd { n } => {
            let _ = writeln!(out, "{prefix}n = {n}");
        }
        Realization::HalfLineMul | Realization::OrderCategory => {}
        Realization::TrivialCategory { dim_x, inner } => {
            let _ = writeln!(out, "{prefix}dim_x = {dim_x}");
            write_realization_fields(inner, &format!("{prefix}inner."), out);
        }
        Realization::EntropyCategory { n } => {
            let _ = writeln!(out, "{prefix}n = {n}");
        }
        Realization::ActionCategory {
            monoid,
            action,
            dim_x,
        } => {
            let _ = writeln!(out, "{prefix}action = {}", action.name());
            let _ = writeln!(out, "{prefix}dim_x = {dim_x}");
            write_realization_fields(monoid, &format!("{prefix}inner."), out);
        }
    }
}

/// Parse an energy model description (`energies`, `temperature`, optional
/// `boltzmann`).
pub fn parse_energy_model(text: &str) -> Result<EnergyModel> {
    let mut fields = Fields {
        map: parse_key_values(text)?,
    };
    let energies = parse_real_list(&fields.require("energies")?)?;
    let temperature = parse_real(&fields.require("temperature")?)?;
    let boltzmann = match fields.take("boltzmann") {
        Some(v) => parse_real(&v)?,
        None => 1.0,
    };
    fields.finish()?;
    EnergyModel::new(energies, temperature, boltzmann)
}

/// Write an energy model description that `parse_energy_model` reconstructs
/// bit-exactly.
pub fn write_energy_model(model: &EnergyModel) -> String {
    format!(
        "energies = {}\ntemperature = {}\nboltzmann = {}\n",
        format_real_list(model.energies()),
        format_real(model.temperature()),
        format_real(model.boltzmann()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_a_matrix_monoid() {
        let c = parse_realization("family = matrix_monoid\nn = 3\n").unwrap();
        assert_eq!(c, Realization::matrix_monoid(3).unwrap());
    }

    #[test]
    fn parses_comments_and_blank_lines() {
        let text = "# an ordered line\n\nfamily = order_category  # trailing note\n";
        let c = parse_realization(text).unwrap();
        assert_eq!(c, Realization::order_category());
    }

    #[test]
    fn rejects_unknown_keys_and_duplicates() {
        let err = parse_realization("family = order_category\nm = 2\n").unwrap_err();
        assert_eq!(err.kind(), "Parse");
        let err = parse_realization("family = order_category\nfamily = order_category\n")
            .unwrap_err();
        assert_eq!(err.kind(), "Parse");
    }

    #[test]
    fn rejects_missing_family() {
        let err = parse_realization("n = 2\n").unwrap_err();
        assert_eq!(err.kind(), "Parse");
    }

    #[test]
    fn algebra_round_trip_is_bit_exact() {
        let alg = AlgebraSpec::upper_triangular_2x2();
        let c = Realization::algebra_monoid(alg);
        let text = write_realization(&c);
        let back = parse_realization(&text).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn algebra_validation_runs_on_parse() {
        // Associativity-breaking structure constants are caught at parse
        // time.
        let mut structure = vec![0.0; 27];
        structure[0] = 1.0; // a*a = a
        structure[(2 * 3 + 2) * 3] = 1.0; // c*c = a, breaks associativity
        structure[(1 * 3 + 1) * 3 + 1] = 1.0;
        structure[(0 * 3 + 2) * 3 + 2] = 1.0;
        structure[(2 * 3 + 1) * 3 + 2] = 1.0;
        let text = format!(
            "family = algebra_monoid\nn = 3\nstructure_constants = {}\nunit_coords = {}\n",
            format_real_list(&structure),
            format_real_list(&[1.0, 1.0, 0.0]),
        );
        let err = parse_realization(&text).unwrap_err();
        assert_eq!(err.kind(), "InvalidSpec");
    }

    #[test]
    fn nested_families_round_trip() {
        let trivial =
            Realization::trivial_category(2, Realization::matrix_monoid(2).unwrap()).unwrap();
        assert_eq!(
            parse_realization(&write_realization(&trivial)).unwrap(),
            trivial
        );
        let action = Realization::action_category(
            Realization::matrix_monoid(3).unwrap(),
            ActionKind::MatrixApply,
            3,
        )
        .unwrap();
        assert_eq!(
            parse_realization(&write_realization(&action)).unwrap(),
            action
        );
    }

    #[test]
    fn action_pairing_is_validated() {
        let text = "family = action_category\naction = scale\ndim_x = 2\ninner.family = half_line_mul\n";
        let err = parse_realization(text).unwrap_err();
        assert_eq!(err.kind(), "InvalidSpec");
    }

    #[test]
    fn energy_model_round_trip_and_default_boltzmann() {
        let text = "energies = 0.0, 1.0, 2.5\ntemperature = 2.0\n";
        let model = parse_energy_model(text).unwrap();
        assert_eq!(model.boltzmann(), 1.0);
        let back = parse_energy_model(&write_energy_model(&model)).unwrap();
        assert_eq!(back.energies(), model.energies());
        assert_eq!(back.temperature(), model.temperature());
    }

    #[test]
    fn energy_model_validation_runs_on_parse() {
        let err = parse_energy_model("energies = 0.0, 1.0\ntemperature = -1.0\n").unwrap_err();
        assert_eq!(err.kind(), "InvalidSpec");
    }

    #[test]
    fn format_real_uses_17_significant_digits() {
        assert_eq!(format_real(1.0), "1.0000000000000000e0");
        assert_eq!(format_real(-0.5), "-5.0000000000000000e-1");
    }

    proptest! {
        #[test]
        fn reals_round_trip_bit_exactly(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let printed = format_real(x);
            let back: f64 = printed.parse().unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }

        #[test]
        fn real_lists_round_trip(xs in proptest::collection::vec(-1e6f64..1e6, 1..12)) {
            let printed = format_real_list(&xs);
            let back = parse_real_list(&printed).unwrap();
            prop_assert_eq!(back, xs);
        }

        #[test]
        fn energy_files_round_trip(
            energies in proptest::collection::vec(-50.0f64..50.0, 2..6),
            temperature in 0.1f64..100.0,
            boltzmann in 0.5f64..2.0,
        ) {
            let model = EnergyModel::new(energies, temperature, boltzmann).unwrap();
            let text = write_energy_model(&model);
            let back = parse_energy_model(&text).unwrap();
            prop_assert_eq!(back.energies(), model.energies());
            prop_assert_eq!(back.temperature().to_bits(), model.temperature().to_bits());
            prop_assert_eq!(back.boltzmann().to_bits(), model.boltzmann().to_bits());
        }
    }
}
