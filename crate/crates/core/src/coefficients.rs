//! Material parameters and their admissibility checks.
//!
//! Elastic constants come as [`FrankCoefficients`] (with the positivity margin
//! `alpha` stored explicitly, `k4 = alpha - k2`), viscous constants in the
//! mu-parameterization as [`LeslieCoefficients`], and the classical six Leslie
//! viscosities as [`ClassicalLeslieCoefficients`]. Validation never mutates;
//! it returns a [`ValidationReport`] listing every clause.
//!
//! Inequalities are compared exactly. Callers wanting a safety margin should
//! shrink their inputs before validating.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const K4_REL_TOL: f64 = 1e-12;

fn check_finite(vals: &[(&str, f64)]) -> Result<()> {
    for (name, v) in vals {
        if !v.is_finite() {
            return Err(Error::InvalidInput(format!("{name} is not finite ({v})")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrankCoefficients {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    pub alpha: f64,
}

impl FrankCoefficients {
    /// Builds from `(k1, k2, k3, alpha)`; `k4` is set to `alpha - k2`.
    pub fn new(k1: f64, k2: f64, k3: f64, alpha: f64) -> Result<Self> {
        check_finite(&[("k1", k1), ("k2", k2), ("k3", k3), ("alpha", alpha)])?;
        Ok(Self { k1, k2, k3, k4: alpha - k2, alpha })
    }

    /// Builds from the four elastic constants; `alpha` becomes `k2 + k4`.
    pub fn from_k4(k1: f64, k2: f64, k3: f64, k4: f64) -> Result<Self> {
        check_finite(&[("k1", k1), ("k2", k2), ("k3", k3), ("k4", k4)])?;
        Ok(Self { k1, k2, k3, k4, alpha: k2 + k4 })
    }

    /// Builds from all five numbers and rejects a `k4` inconsistent with `alpha - k2`.
    pub fn with_k4_checked(k1: f64, k2: f64, k3: f64, k4: f64, alpha: f64) -> Result<Self> {
        let c = Self::new(k1, k2, k3, alpha)?;
        check_finite(&[("k4", k4)])?;
        let scale = k2.abs().max(alpha.abs()).max(k4.abs()).max(f64::MIN_POSITIVE);
        if (c.k4 - k4).abs() > K4_REL_TOL * scale {
            return Err(Error::InvalidInput(format!(
                "k4 = {k4} does not equal alpha - k2 = {}",
                c.k4
            )));
        }
        Ok(c)
    }

    pub fn isotropic() -> Self {
        Self { k1: 1.0, k2: 1.0, k3: 1.0, k4: 0.0, alpha: 1.0 }
    }

    /// Largest of k1, k2, k3; the natural scale for tolerances.
    pub fn scale(&self) -> f64 {
        self.k1.abs().max(self.k2.abs()).max(self.k3.abs())
    }

    /// True when the energy collapses to `k |grad d|^2`.
    pub fn is_isotropic(&self) -> bool {
        self.k1 == self.k3 && self.k2 == self.k3 && self.alpha == self.k3
    }
}

#[derive(Deserialize)]
struct FrankRepr {
    k1: f64,
    k2: f64,
    k3: f64,
    alpha: f64,
    #[serde(default)]
    k4: Option<f64>,
}

impl<'de> Deserialize<'de> for FrankCoefficients {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let r = FrankRepr::deserialize(de)?;
        let c = match r.k4 {
            Some(k4) => Self::with_k4_checked(r.k1, r.k2, r.k3, k4, r.alpha),
            None => Self::new(r.k1, r.k2, r.k3, r.alpha),
        };
        c.map_err(serde::de::Error::custom)
    }
}

/// Viscous constants in the mu-parameterization of the constitutive laws.
///
/// `mu_b` only multiplies `div u`, so it is inert for incompressible flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeslieCoefficients {
    pub mu_s: f64,
    #[serde(rename = "mu_V")]
    pub mu_v: f64,
    #[serde(rename = "mu_D")]
    pub mu_d: f64,
    #[serde(rename = "mu_P")]
    pub mu_p: f64,
    #[serde(rename = "mu_L")]
    pub mu_l: f64,
    pub mu_0: f64,
    #[serde(default)]
    pub mu_b: f64,
    pub gamma: f64,
    pub rho: f64,
}

impl LeslieCoefficients {
    pub fn check_finite(&self) -> Result<()> {
        check_finite(&[
            ("mu_s", self.mu_s),
            ("mu_V", self.mu_v),
            ("mu_D", self.mu_d),
            ("mu_P", self.mu_p),
            ("mu_L", self.mu_l),
            ("mu_0", self.mu_0),
            ("mu_b", self.mu_b),
            ("gamma", self.gamma),
            ("rho", self.rho),
        ])
    }

    /// Newtonian fluid with unit rotational viscosity and density.
    pub fn newtonian(mu_s: f64) -> Self {
        Self {
            mu_s,
            mu_v: 0.0,
            mu_d: 0.0,
            mu_p: 0.0,
            mu_l: 0.0,
            mu_0: 0.0,
            mu_b: 0.0,
            gamma: 1.0,
            rho: 1.0,
        }
    }

    /// `mu_+ = mu_D + mu_V + mu_P`
    pub fn mu_plus(&self) -> f64 {
        self.mu_d + self.mu_v + self.mu_p
    }

    /// `mu_- = mu_D - mu_V + mu_P`
    pub fn mu_minus(&self) -> f64 {
        self.mu_d - self.mu_v + self.mu_p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalLeslieCoefficients {
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    pub alpha4: f64,
    pub alpha5: f64,
    pub alpha6: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

impl ClassicalLeslieCoefficients {
    pub fn check_finite(&self) -> Result<()> {
        check_finite(&[
            ("alpha1", self.alpha1),
            ("alpha2", self.alpha2),
            ("alpha3", self.alpha3),
            ("alpha4", self.alpha4),
            ("alpha5", self.alpha5),
            ("alpha6", self.alpha6),
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
        ])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Clause {
    pub name: String,
    pub holds: bool,
    /// Informational clauses (e.g. one branch of a disjunction) do not decide the verdict.
    pub required: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub title: String,
    pub clauses: Vec<Clause>,
}

impl ValidationReport {
    fn new(title: &str) -> Self {
        Self { title: title.to_string(), clauses: Vec::new() }
    }

    fn push(&mut self, name: &str, holds: bool, detail: String) {
        self.clauses.push(Clause { name: name.into(), holds, required: true, detail });
    }

    fn push_info(&mut self, name: &str, holds: bool, detail: String) {
        self.clauses.push(Clause { name: name.into(), holds, required: false, detail });
    }

    pub fn passed(&self) -> bool {
        self.clauses.iter().filter(|c| c.required).all(|c| c.holds)
    }

    pub fn failed_clauses(&self) -> Vec<&Clause> {
        self.clauses.iter().filter(|c| !c.holds).collect()
    }

    pub fn clause(&self, name: &str) -> Option<&Clause> {
        self.clauses.iter().find(|c| c.name == name)
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "{}: {}", self.title, if self.passed() { "PASS" } else { "FAIL" })?;
        for c in &self.clauses {
            let tag = match (c.holds, c.required) {
                (true, _) => "ok  ",
                (false, true) => "FAIL",
                (false, false) => "no  ",
            };
            writeln!(f, "  [{tag}] {:<28} {}", c.name, c.detail)?;
        }
        Ok(())
    }
}

/// Positivity assumption on the Frank constants, clause by clause.
pub fn validate_frank(c: &FrankCoefficients) -> Result<ValidationReport> {
    check_finite(&[("k1", c.k1), ("k2", c.k2), ("k3", c.k3), ("k4", c.k4), ("alpha", c.alpha)])?;
    let mut r = ValidationReport::new("Frank positivity (F)");
    r.push("k1 > 0", c.k1 > 0.0, format!("k1 = {}", c.k1));
    r.push("k2 > 0", c.k2 > 0.0, format!("k2 = {}", c.k2));
    r.push("k3 > 0", c.k3 > 0.0, format!("k3 = {}", c.k3));
    let kmin = c.k1.min(c.k2).min(c.k3);
    r.push(
        "0 < alpha <= min(k1,k2,k3)",
        c.alpha > 0.0 && c.alpha <= kmin,
        format!("alpha = {}, min k = {kmin}", c.alpha),
    );
    let scale = c.k2.abs().max(c.alpha.abs()).max(c.k4.abs()).max(f64::MIN_POSITIVE);
    r.push(
        "k4 = alpha - k2",
        (c.k4 - (c.alpha - c.k2)).abs() <= K4_REL_TOL * scale,
        format!("k4 = {}, alpha - k2 = {}", c.k4, c.alpha - c.k2),
    );
    let d1 = 9.0 * c.k3 > c.k1;
    let d2 = 2.0 * (c.k1 - c.k3).abs() < c.k2.min(c.k3);
    r.push_info("9 k3 > k1", d1, format!("9 k3 = {}, k1 = {}", 9.0 * c.k3, c.k1));
    r.push_info(
        "2|k1 - k3| < min(k2,k3)",
        d2,
        format!("2|k1 - k3| = {}, min(k2,k3) = {}", 2.0 * (c.k1 - c.k3).abs(), c.k2.min(c.k3)),
    );
    r.push("one of the two disjuncts", d1 || d2, String::new());
    Ok(r)
}

pub fn validate_ericksen_inequalities(c: &FrankCoefficients) -> Result<ValidationReport> {
    check_finite(&[("k1", c.k1), ("k2", c.k2), ("k3", c.k3), ("k4", c.k4)])?;
    let mut r = ValidationReport::new("Ericksen inequalities");
    r.push("k1 > 0", c.k1 > 0.0, format!("k1 = {}", c.k1));
    r.push("k2 > 0", c.k2 > 0.0, format!("k2 = {}", c.k2));
    r.push("k3 > 0", c.k3 > 0.0, format!("k3 = {}", c.k3));
    r.push("k2 > |k4|", c.k2 > c.k4.abs(), format!("k2 = {}, |k4| = {}", c.k2, c.k4.abs()));
    r.push(
        "2 k1 > k2 + k4",
        2.0 * c.k1 > c.k2 + c.k4,
        format!("2 k1 = {}, k2 + k4 = {}", 2.0 * c.k1, c.k2 + c.k4),
    );
    Ok(r)
}

/// Thermodynamic consistency of the viscous constants in dimension `n`.
pub fn validate_consistency(c: &LeslieCoefficients, n: u32) -> Result<ValidationReport> {
    c.check_finite()?;
    let mut r = ValidationReport::new("thermodynamic consistency");
    r.push("mu_s >= 0", c.mu_s >= 0.0, format!("mu_s = {}", c.mu_s));
    let bulk = 2.0 * c.mu_s + n as f64 * c.mu_b;
    r.push("2 mu_s + n mu_b >= 0", bulk >= 0.0, format!("2 mu_s + {n} mu_b = {bulk}"));
    r.push("mu_0 >= 0", c.mu_0 >= 0.0, format!("mu_0 = {}", c.mu_0));
    r.push("mu_L >= 0", c.mu_l >= 0.0, format!("mu_L = {}", c.mu_l));
    r.push("gamma > 0", c.gamma > 0.0, format!("gamma = {}", c.gamma));
    Ok(r)
}

/// Parabolicity assumption on the viscous constants (strict `mu_s`).
pub fn validate_leslie(c: &LeslieCoefficients) -> Result<ValidationReport> {
    c.check_finite()?;
    let mut r = ValidationReport::new("viscosity assumption (P)");
    r.push("mu_s > 0", c.mu_s > 0.0, format!("mu_s = {}", c.mu_s));
    r.push("gamma > 0", c.gamma > 0.0, format!("gamma = {}", c.gamma));
    r.push("mu_0 >= 0", c.mu_0 >= 0.0, format!("mu_0 = {}", c.mu_0));
    r.push("mu_L >= 0", c.mu_l >= 0.0, format!("mu_L = {}", c.mu_l));
    r.push("rho > 0", c.rho > 0.0, format!("rho = {}", c.rho));
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn leslie(mu_s: f64, mu_b: f64, gamma: f64) -> LeslieCoefficients {
        LeslieCoefficients { mu_b, gamma, ..LeslieCoefficients::newtonian(mu_s) }
    }

    #[test]
    fn frank_examples() {
        let iso = FrankCoefficients::new(1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(iso.k4, 0.0);
        assert!(validate_frank(&iso).unwrap().passed());

        let bad = FrankCoefficients::new(10.0, 1.0, 1.0, 1.0).unwrap();
        let r = validate_frank(&bad).unwrap();
        assert!(!r.passed());
        assert!(!r.clause("9 k3 > k1").unwrap().holds);
        assert!(!r.clause("2|k1 - k3| < min(k2,k3)").unwrap().holds);

        let c = FrankCoefficients::new(2.0, 1.0, 1.0, 0.5).unwrap();
        assert_eq!(c.k4, -0.5);
        assert!(validate_frank(&c).unwrap().passed());
    }

    #[test]
    fn k4_mismatch_rejected() {
        assert!(FrankCoefficients::with_k4_checked(1.0, 1.0, 1.0, 0.0, 1.0).is_ok());
        assert!(FrankCoefficients::with_k4_checked(1.0, 1.0, 1.0, 1e-6, 1.0).is_err());
        assert!(FrankCoefficients::new(f64::NAN, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn ericksen_examples() {
        let ok = FrankCoefficients::from_k4(1.0, 1.0, 1.0, 0.0).unwrap();
        assert!(validate_ericksen_inequalities(&ok).unwrap().passed());
        let r = validate_ericksen_inequalities(&FrankCoefficients::from_k4(1.0, 1.0, 1.0, 2.0).unwrap()).unwrap();
        assert!(!r.passed());
        assert!(!r.clause("k2 > |k4|").unwrap().holds);
        let r = validate_ericksen_inequalities(&FrankCoefficients::from_k4(0.4, 1.0, 1.0, 0.1).unwrap()).unwrap();
        assert!(!r.clause("2 k1 > k2 + k4").unwrap().holds);
    }

    #[test]
    fn consistency_examples() {
        assert!(validate_consistency(&leslie(1.0, 0.0, 1.0), 3).unwrap().passed());
        let r = validate_consistency(&leslie(1.0, 0.0, 0.0), 3).unwrap();
        assert!(!r.clause("gamma > 0").unwrap().holds);
        let r = validate_consistency(&leslie(1.0, -1.0, 1.0), 3).unwrap();
        assert!(!r.clause("2 mu_s + n mu_b >= 0").unwrap().holds);
    }

    #[test]
    fn config_keys_roundtrip() {
        let json = r#"{"mu_s":1.0,"mu_V":0.5,"mu_D":0.2,"mu_P":0.1,"mu_L":0.3,"mu_0":0.4,"mu_b":0.0,"gamma":2.0,"rho":1.0}"#;
        let c: LeslieCoefficients = serde_json::from_str(json).unwrap();
        assert_eq!(c.mu_v, 0.5);
        let back: serde_json::Value = serde_json::to_value(c).unwrap();
        assert_eq!(back, serde_json::from_str::<serde_json::Value>(json).unwrap());

        let f: FrankCoefficients = serde_json::from_str(r#"{"k1":2,"k2":1,"k3":1,"alpha":0.5}"#).unwrap();
        assert_eq!(f.k4, -0.5);
        assert!(serde_json::from_str::<FrankCoefficients>(r#"{"k1":2,"k2":1,"k3":1,"alpha":0.5,"k4":3}"#).is_err());
    }

    proptest! {
        #[test]
        fn nonpositive_k_rejected(k in -5.0f64..=0.0, which in 0usize..3, a in 0.1f64..1.0) {
            let mut ks = [1.0, 1.0, 1.0];
            ks[which] = k;
            let c = FrankCoefficients::new(ks[0], ks[1], ks[2], a).unwrap();
            prop_assert!(!validate_frank(&c).unwrap().passed());
        }
    }

    // The Ericksen inequalities do not imply (F), but (F) implies them:
    // 0 < alpha <= k2 gives |k4| = |alpha - k2| < k2, and k2 + k4 = alpha <= k1 < 2 k1.
    #[test]
    fn frank_implies_ericksen_but_not_conversely() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let (mut f_only, mut e_only, mut both) = (0, 0, 0);
        for _ in 0..20_000 {
            let k1 = rng.gen_range(0.05..12.0);
            let k2 = rng.gen_range(0.05..3.0);
            let k3 = rng.gen_range(0.05..3.0);
            let alpha = rng.gen_range(-0.5..3.0);
            let c = FrankCoefficients::new(k1, k2, k3, alpha).unwrap();
            let f = validate_frank(&c).unwrap().passed();
            let e = validate_ericksen_inequalities(&c).unwrap().passed();
            f_only += (f && !e) as usize;
            e_only += (e && !f) as usize;
            both += (e && f) as usize;
        }
        assert_eq!(f_only, 0);
        assert!(e_only > 0 && both > 0, "e_only={e_only} both={both}");
    }
}
