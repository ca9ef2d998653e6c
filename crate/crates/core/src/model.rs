//! Continuous problem description: geometry, damping coefficients and
//! initial data for the beam-string-beam structure.
//!
//! Beam 1 occupies `(l0, l1)`, the string `(l1, l2)` and beam 2 `(l2, l3)`.
//! All material constants are normalized to one, so the only physical
//! parameters are the three damping coefficients.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("interval endpoints must satisfy l0 < l1 < l2 < l3 (got {l0}, {l1}, {l2}, {l3})")]
    OrderingViolation { l0: f64, l1: f64, l2: f64, l3: f64 },
    #[error("damping coefficient {name} must be a finite value >= 0 (got {value})")]
    NegativeDamping { name: &'static str, value: f64 },
}

/// Geometry and damping of the structure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureConfig {
    pub l0: f64,
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    /// Structural (Kelvin-Voigt) damping of beam 1.
    pub rho1: f64,
    /// Structural (Kelvin-Voigt) damping of beam 2.
    pub rho2: f64,
    /// Frictional damping of the string.
    pub beta: f64,
}

impl StructureConfig {
    /// Unit intervals `(0,1), (1,2), (2,3)` with the given damping.
    pub fn unit(rho1: f64, rho2: f64, beta: f64) -> Self {
        StructureConfig {
            l0: 0.0,
            l1: 1.0,
            l2: 2.0,
            l3: 3.0,
            rho1,
            rho2,
            beta,
        }
    }

    pub fn validate(self) -> Result<Self, ModelError> {
        validate_config(self)
    }

    pub fn beam1_length(&self) -> f64 {
        self.l1 - self.l0
    }

    pub fn string_length(&self) -> f64 {
        self.l2 - self.l1
    }

    pub fn beam2_length(&self) -> f64 {
        self.l3 - self.l2
    }

    pub fn damping_case(&self) -> DampingCase {
        classify_damping(self)
    }
}

/// Checks the standing assumptions and returns the configuration unchanged.
pub fn validate_config(cfg: StructureConfig) -> Result<StructureConfig, ModelError> {
    let StructureConfig {
        l0, l1, l2, l3, ..
    } = cfg;
    let finite = [l0, l1, l2, l3].iter().all(|v| v.is_finite());
    if !finite || !(l0 < l1 && l1 < l2 && l2 < l3) {
        return Err(ModelError::OrderingViolation { l0, l1, l2, l3 });
    }
    for (name, value) in [("rho1", cfg.rho1), ("rho2", cfg.rho2), ("beta", cfg.beta)] {
        // `!(value >= 0)` also rejects NaN.
        if !(value >= 0.0) || !value.is_finite() {
            return Err(ModelError::NegativeDamping { name, value });
        }
    }
    Ok(cfg)
}

/// Damping regime of a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DampingCase {
    /// Both beams structurally damped and the string frictionally damped.
    Ddd,
    /// Undamped beams around a frictionally damped string.
    Udu,
    /// No damping at all.
    Conservative,
    Other,
}

impl DampingCase {
    pub fn tag(self) -> &'static str {
        match self {
            DampingCase::Ddd => "DDD",
            DampingCase::Udu => "UDU",
            DampingCase::Conservative => "Conservative",
            DampingCase::Other => "Other",
        }
    }

    pub fn is_dissipative(self) -> bool {
        self != DampingCase::Conservative
    }
}

impl fmt::Display for DampingCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

pub fn classify_damping(cfg: &StructureConfig) -> DampingCase {
    let (r1, r2, b) = (cfg.rho1, cfg.rho2, cfg.beta);
    if r1 > 0.0 && r2 > 0.0 && b > 0.0 {
        DampingCase::Ddd
    } else if r1 == 0.0 && r2 == 0.0 && b > 0.0 {
        DampingCase::Udu
    } else if r1 == 0.0 && r2 == 0.0 && b == 0.0 {
        DampingCase::Conservative
    } else {
        DampingCase::Other
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// One scalar component of the initial data on one interval.
///
/// Beam components are Hermite-interpolated and therefore need slopes;
/// string components only use values.
#[derive(Clone)]
pub enum Profile {
    Zero,
    /// Closed form with its derivative.
    Function { value: ScalarFn, slope: ScalarFn },
    /// One value per mesh node of the interval. Missing beam slopes are
    /// recovered by second-order finite differences.
    Samples {
        values: Vec<f64>,
        slopes: Option<Vec<f64>>,
    },
}

impl Profile {
    pub fn function<F, G>(value: F, slope: G) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Profile::Function {
            value: Arc::new(value),
            slope: Arc::new(slope),
        }
    }

    pub fn samples(values: Vec<f64>) -> Self {
        Profile::Samples {
            values,
            slopes: None,
        }
    }
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Zero => f.write_str("Zero"),
            Profile::Function { .. } => f.write_str("Function(..)"),
            Profile::Samples { values, slopes } => f
                .debug_struct("Samples")
                .field("len", &values.len())
                .field("has_slopes", &slopes.is_some())
                .finish(),
        }
    }
}

/// Initial displacement (`*0`) and velocity (`*1`) on each interval.
#[derive(Debug, Clone)]
pub struct InitialData {
    pub u0: Profile,
    pub u1: Profile,
    pub v0: Profile,
    pub v1: Profile,
    pub w0: Profile,
    pub w1: Profile,
}

impl InitialData {
    pub fn zero() -> Self {
        InitialData {
            u0: Profile::Zero,
            u1: Profile::Zero,
            v0: Profile::Zero,
            v1: Profile::Zero,
            w0: Profile::Zero,
            w1: Profile::Zero,
        }
    }

    /// Displacement only, zero velocity.
    pub fn displacement(u0: Profile, v0: Profile, w0: Profile) -> Self {
        InitialData {
            u0,
            v0,
            w0,
            ..InitialData::zero()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn validate_examples() {
        let ok = StructureConfig::unit(1.0, 1.0, 1.0);
        assert_eq!(validate_config(ok), Ok(ok));

        let degenerate = StructureConfig {
            l1: 0.0,
            ..StructureConfig::unit(1.0, 1.0, 1.0)
        };
        assert!(matches!(
            validate_config(degenerate),
            Err(ModelError::OrderingViolation { .. })
        ));

        let negative = StructureConfig::unit(1.0, 1.0, -0.1);
        assert!(matches!(
            validate_config(negative),
            Err(ModelError::NegativeDamping { name: "beta", .. })
        ));
        let nan = StructureConfig::unit(f64::NAN, 1.0, 1.0);
        assert!(validate_config(nan).is_err());
        let reversed = StructureConfig {
            l2: 0.5,
            ..StructureConfig::unit(0.0, 0.0, 0.0)
        };
        assert!(validate_config(reversed).is_err());
    }

    #[test]
    fn classify_examples() {
        assert_eq!(
            classify_damping(&StructureConfig::unit(1.0, 1.0, 1.0)),
            DampingCase::Ddd
        );
        assert_eq!(
            classify_damping(&StructureConfig::unit(0.0, 0.0, 0.5)),
            DampingCase::Udu
        );
        assert_eq!(
            classify_damping(&StructureConfig::unit(0.0, 0.0, 0.0)),
            DampingCase::Conservative
        );
        assert_eq!(
            classify_damping(&StructureConfig::unit(1.0, 0.0, 0.0)),
            DampingCase::Other
        );
        assert_eq!(
            classify_damping(&StructureConfig::unit(0.0, 1.0, 1.0)),
            DampingCase::Other
        );
    }

    fn damping() -> impl Strategy<Value = f64> {
        prop_oneof![Just(0.0), 0.0..5.0f64]
    }

    proptest! {
        #[test]
        fn validate_is_idempotent(
            l0 in -5.0..5.0f64, d1 in -1.0..3.0f64, d2 in -1.0..3.0f64, d3 in -1.0..3.0f64,
            rho1 in -1.0..2.0f64, rho2 in -1.0..2.0f64, beta in -1.0..2.0f64,
        ) {
            let cfg = StructureConfig { l0, l1: l0 + d1, l2: l0 + d1 + d2, l3: l0 + d1 + d2 + d3, rho1, rho2, beta };
            let once = validate_config(cfg);
            let twice = once.clone().and_then(validate_config);
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn classification_partitions(rho1 in damping(), rho2 in damping(), beta in damping()) {
            let cfg = StructureConfig::unit(rho1, rho2, beta);
            let case = classify_damping(&cfg);
            let ddd = rho1 > 0.0 && rho2 > 0.0 && beta > 0.0;
            let udu = rho1 == 0.0 && rho2 == 0.0 && beta > 0.0;
            let cons = rho1 == 0.0 && rho2 == 0.0 && beta == 0.0;
            prop_assert_eq!(case == DampingCase::Ddd, ddd);
            prop_assert_eq!(case == DampingCase::Udu, udu);
            prop_assert_eq!(case == DampingCase::Conservative, cons);
            prop_assert_eq!(case == DampingCase::Other, !(ddd || udu || cons));
        }
    }
}
