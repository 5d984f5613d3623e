//! Tolerances, overridable through `PERTURBEX_TOL`.
//!
//! The variable holds either one number, applied to every tolerance, or a
//! comma-separated list of `key=value` pairs.

use serde::Serialize;

use crate::error::CliError;

pub const ENV_VAR: &str = "PERTURBEX_TOL";

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    /// Absolute error on closed-form fixture values.
    pub fixture: f64,
    /// Absolute error on the golden-mean Perron root.
    pub perron: f64,
    /// Relative gap between the dual and eigenfunction routes.
    pub route: f64,
    /// Gap between the low-order closed forms and the recursion.
    pub closed_form: f64,
    /// Relative gap between direct and formula remainders.
    pub identity: f64,
    /// Half-width of the accepted slope band around 1.
    pub slope: f64,
    /// Absolute error on `s_0`.
    pub dimension: f64,
    /// Absolute error on `s_1`, limited by the stencil.
    pub stencil: f64,
    /// Relative error on `s_2`.
    pub second_order: f64,
    /// Relative spread of the rate margins on the boundary schedule.
    pub margin: f64,
    /// Allowed shortfall of product slopes below their predicted rate.
    pub product_slack: f64,
    /// Structural invariants.
    pub invariant: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            fixture: 1e-10,
            perron: 1e-12,
            route: 1e-11,
            closed_form: 1e-12,
            identity: 1e-9,
            slope: 0.2,
            dimension: 1e-10,
            stencil: 1e-6,
            second_order: 1e-8,
            margin: 1e-12,
            product_slack: 0.1,
            invariant: 1e-10,
        }
    }
}

impl Tolerances {
    fn slot(&mut self, key: &str) -> Option<&mut f64> {
        Some(match key {
            "fixture" => &mut self.fixture,
            "perron" => &mut self.perron,
            "route" => &mut self.route,
            "closed_form" => &mut self.closed_form,
            "identity" => &mut self.identity,
            "slope" => &mut self.slope,
            "dimension" => &mut self.dimension,
            "stencil" => &mut self.stencil,
            "second_order" => &mut self.second_order,
            "margin" => &mut self.margin,
            "product_slack" => &mut self.product_slack,
            "invariant" => &mut self.invariant,
            _ => return None,
        })
    }

    pub fn parse(spec: &str) -> Result<Self, CliError> {
        let bad = |s: &str| CliError::Schema(format!("{ENV_VAR}: cannot parse {s:?}"));
        let number = |s: &str| -> Result<f64, CliError> {
            let v: f64 = s.trim().parse().map_err(|_| bad(s))?;
            if v.is_finite() && v >= 0.0 {
                Ok(v)
            } else {
                Err(bad(s))
            }
        };
        let mut t = Tolerances::default();
        let spec = spec.trim();
        if !spec.contains('=') {
            let v = number(spec)?;
            for key in KEYS {
                *t.slot(key).expect("known key") = v;
            }
            return Ok(t);
        }
        for pair in spec.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = pair.split_once('=').ok_or_else(|| bad(pair))?;
            let v = number(v)?;
            *t.slot(k.trim()).ok_or_else(|| CliError::Schema(format!("{ENV_VAR}: unknown key {:?}", k.trim())))? = v;
        }
        Ok(t)
    }

    /// Defaults, overridden from the environment when the variable is set.
    pub fn from_env() -> Result<Self, CliError> {
        match std::env::var(ENV_VAR) {
            Ok(s) => Self::parse(&s),
            Err(_) => Ok(Self::default()),
        }
    }
}

pub const KEYS: [&str; 12] = [
    "fixture",
    "perron",
    "route",
    "closed_form",
    "identity",
    "slope",
    "dimension",
    "stencil",
    "second_order",
    "margin",
    "product_slack",
    "invariant",
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_value_sets_all() {
        let t = Tolerances::parse("1e-15").unwrap();
        assert_eq!(t.identity, 1e-15);
        assert_eq!(t.slope, 1e-15);
    }

    #[test]
    fn pairs_set_some() {
        let t = Tolerances::parse("identity=1e-8, invariant=1e-9").unwrap();
        assert_eq!(t.identity, 1e-8);
        assert_eq!(t.invariant, 1e-9);
        assert_eq!(t.route, Tolerances::default().route);
    }

    #[test]
    fn rejects_garbage() {
        assert!(Tolerances::parse("tight").is_err());
        assert!(Tolerances::parse("nope=1").is_err());
        assert!(Tolerances::parse("-1").is_err());
    }
}
