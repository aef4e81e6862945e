//! Symmetric single-qubit (incoherent) attacks.
//!
//! Eve's probe states `|E_ij>` (Alice sent bit `i`, Bob received bit `j`) are
//! fixed, up to realization, by two real numbers: the disturbance `D` and the
//! overlap `D1 = <E01|E10>`. Everything else follows from
//! `F + D = 1` and `F - D = F1 + D1`.

use std::f64::consts::SQRT_2;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{binary_entropy, GramMatrix};

const FEASIBILITY_SLACK: f64 = 1e-12;

/// A feasible symmetric single-qubit attack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncoherentParams {
    d: f64,
    d1: f64,
}

impl IncoherentParams {
    /// Builds the attack from `(D, D1)`, rejecting pairs whose Gram is not PSD.
    pub fn new(d: f64, d1: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&d) {
            return Err(Error::Domain(format!("disturbance {d} outside [0, 1]")));
        }
        if !d1.is_finite() {
            return Err(Error::Domain(format!("D1 = {d1} is not finite")));
        }
        let p = Self { d, d1 };
        if d1.abs() > d + FEASIBILITY_SLACK {
            return Err(Error::Infeasible(format!("|D1| = {} exceeds D = {d}", d1.abs())));
        }
        if p.f1().abs() > p.f() + FEASIBILITY_SLACK {
            return Err(Error::Infeasible(format!(
                "|F1| = {} exceeds F = {}",
                p.f1().abs(),
                p.f()
            )));
        }
        Ok(p)
    }

    /// The attack that leaves every qubit untouched.
    pub fn identity() -> Self {
        Self { d: 0.0, d1: 0.0 }
    }

    pub fn disturbance(&self) -> f64 {
        self.d
    }

    pub fn d1(&self) -> f64 {
        self.d1
    }

    /// Fidelity `F = 1 - D`.
    pub fn f(&self) -> f64 {
        1.0 - self.d
    }

    /// `F1 = <E00|E11> = F - D - D1`.
    pub fn f1(&self) -> f64 {
        self.f() - self.d - self.d1
    }

    pub fn cos_alpha(&self) -> f64 {
        self.f1() / self.f()
    }

    /// `None` when `D = 0`, where the angle is undefined.
    pub fn cos_beta(&self) -> Option<f64> {
        (self.d > 0.0).then(|| self.d1 / self.d)
    }

    fn p_alpha(&self) -> f64 {
        success_from_cos(self.cos_alpha())
    }

    fn p_beta(&self) -> f64 {
        self.cos_beta().map_or(0.5, success_from_cos)
    }
}

/// Helstrom probability `[1 + sin(g)]/2` of telling apart two equiprobable
/// states with overlap `cos(g)`.
pub fn success_from_cos(cos: f64) -> f64 {
    let c = cos.clamp(-1.0, 1.0);
    0.5 * (1.0 + (1.0 - c * c).sqrt())
}

/// Per-qubit figures of merit for Eve and Bob.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackMetrics {
    pub disturbance: f64,
    pub eve_information: f64,
    pub eve_success: f64,
    pub bob_information: f64,
    pub bob_success: f64,
}

/// Eve's mutual information with Alice's bit, `1 + F H(P_a) + D H(P_b)` where
/// `H` is the (negative) signed base-2 entropy.
pub fn eve_information(p: &IncoherentParams) -> f64 {
    let signed = |q: f64| -binary_entropy(q).expect("Helstrom probability lies in [1/2, 1]");
    let beta_term = if p.d > 0.0 { p.d * signed(p.p_beta()) } else { 0.0 };
    1.0 + p.f() * signed(p.p_alpha()) + beta_term
}

/// Probability that Eve identifies Alice's bit.
pub fn eve_success(p: &IncoherentParams) -> f64 {
    p.f() * p.p_alpha() + p.d * p.p_beta()
}

/// Bob's information `1 - H(D)` and success probability `1 - D`.
pub fn bob_metrics(d: f64) -> Result<(f64, f64)> {
    Ok((1.0 - binary_entropy(d)?, 1.0 - d))
}

pub fn metrics(p: &IncoherentParams) -> AttackMetrics {
    let (bob_information, bob_success) = bob_metrics(p.d).expect("disturbance validated at construction");
    AttackMetrics {
        disturbance: p.d,
        eve_information: eve_information(p),
        eve_success: eve_success(p),
        bob_information,
        bob_success,
    }
}

/// The optimum at fixed disturbance: equal overlaps in both syndrome sets,
/// `cos a = cos b = 1 - 2D`, i.e. `D1 = D (1 - 2D)`.
pub fn optimal_attack(d: f64) -> Result<IncoherentParams> {
    if !(0.0..=0.5).contains(&d) {
        return Err(Error::Domain(format!(
            "optimal attack defined for D in [0, 1/2], got {d}"
        )));
    }
    IncoherentParams::new(d, d * (1.0 - 2.0 * d))
}

/// 4x4 Gram matrix over `(E00, E01, E10, E11)`.
pub fn gram4(p: &IncoherentParams) -> GramMatrix {
    let mut m = DMatrix::zeros(4, 4);
    m[(0, 0)] = p.f();
    m[(3, 3)] = p.f();
    m[(1, 1)] = p.d;
    m[(2, 2)] = p.d;
    m[(0, 3)] = p.f1();
    m[(3, 0)] = p.f1();
    m[(1, 2)] = p.d1;
    m[(2, 1)] = p.d1;
    GramMatrix::new(m).expect("feasible parameters give a valid Gram matrix")
}

/// CHSH value `2 sqrt(2) cos a` reached by Alice and Bob through the channel.
pub fn chsh_parameter(cos_alpha: f64) -> f64 {
    2.0 * SQRT_2 * cos_alpha
}

/// The disturbance in `(0, 1/2)` where Eve's optimal information equals Bob's,
/// found by bisection on `I_e(D) - I_b(D)`.
pub fn information_crossing() -> f64 {
    let gap = |d: f64| {
        let e = eve_information(&optimal_attack(d).expect("d in range"));
        let (b, _) = bob_metrics(d).expect("d in range");
        e - b
    };
    let (mut lo, mut hi) = (1e-6, 0.5 - 1e-6);
    debug_assert!(gap(lo) < 0.0 && gap(hi) > 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gap(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Secant slope `I_e(D) / D` of the optimal information at small `D`, in bits
/// per unit disturbance. Tends to `2 / ln 2` as `D -> 0`.
pub fn information_slope_at(d: f64) -> Result<f64> {
    if !(d > 0.0 && d <= 0.5) {
        return Err(Error::Domain(format!("slope needs D in (0, 1/2], got {d}")));
    }
    Ok(eve_information(&optimal_attack(d)?) / d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{is_psd, DEFAULT_PSD_TOL};
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, LN_2};

    #[test]
    fn new_params_examples() {
        let p = IncoherentParams::new(0.0, 0.0).unwrap();
        assert_eq!((p.f(), p.f1(), p.cos_alpha()), (1.0, 1.0, 1.0));
        assert_eq!(p.cos_beta(), None);

        let p = IncoherentParams::new(0.25, 0.125).unwrap();
        assert_eq!(p.f(), 0.75);
        assert_eq!(p.f1(), 0.375);
        assert_eq!(p.cos_alpha(), 0.5);
        assert_eq!(p.cos_beta(), Some(0.5));

        assert!(matches!(IncoherentParams::new(0.1, 0.2), Err(Error::Infeasible(_))));
        assert!(matches!(IncoherentParams::new(1.2, 0.0), Err(Error::Domain(_))));
        // |F1| > F: D = 0.1 forces F1 = 0.8 - D1, so D1 = -0.1 is allowed but F1 = 0.9 <= 0.9.
        assert!(IncoherentParams::new(0.1, -0.1).is_ok());
    }

    #[test]
    fn eve_information_examples() {
        let opt = optimal_attack(0.25).unwrap();
        assert!((eve_information(&opt) - 0.6454).abs() < 5e-5);
        assert_eq!(eve_information(&IncoherentParams::identity()), 0.0);
        assert!((eve_information(&optimal_attack(0.5).unwrap()) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eve_success_examples() {
        let expected = 0.5 * (1.0 + 3f64.sqrt() / 2.0);
        assert!((eve_success(&optimal_attack(0.25).unwrap()) - expected).abs() < 1e-15);
        assert!((expected - 0.93301).abs() < 5e-6);
        assert_eq!(eve_success(&IncoherentParams::identity()), 0.5);
        assert!((eve_success(&optimal_attack(0.5).unwrap()) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bob_metrics_examples() {
        assert_eq!(bob_metrics(0.0).unwrap(), (1.0, 1.0));
        assert_eq!(bob_metrics(0.5).unwrap(), (0.0, 0.5));
        let (i, p) = bob_metrics(0.146447).unwrap();
        assert!((i - 0.39910).abs() < 5e-5, "{i}");
        assert!((p - 0.853553).abs() < 1e-12);
        assert!(bob_metrics(1.5).is_err());
    }

    #[test]
    fn optimal_attack_examples() {
        let p = optimal_attack(0.25).unwrap();
        assert!((p.cos_alpha().acos() - std::f64::consts::FRAC_PI_3).abs() < 1e-12);
        let p = optimal_attack(0.0).unwrap();
        assert_eq!(p, IncoherentParams::identity());
        assert!(matches!(optimal_attack(0.6), Err(Error::Domain(_))));

        let dstar = 0.5 * (1.0 - FRAC_1_SQRT_2);
        let p = optimal_attack(dstar).unwrap();
        assert!((p.cos_alpha() - FRAC_1_SQRT_2).abs() < 1e-12);
        let (ib, _) = bob_metrics(dstar).unwrap();
        assert!((eve_information(&p) - ib).abs() < 1e-12);
        assert!((ib - 0.39910).abs() < 5e-5);
    }

    #[test]
    fn gram4_examples() {
        let g = gram4(&IncoherentParams::identity());
        assert_eq!(g.to_rows()[0], vec![1.0, 0.0, 0.0, 1.0]);
        assert_eq!(g.get(1, 1), 0.0);
        let g = gram4(&optimal_attack(0.25).unwrap());
        assert_eq!(g.get(0, 3), 0.375);
        assert_eq!(g.get(1, 2), 0.125);
        assert_eq!(g.get(0, 1), 0.0);
    }

    #[test]
    fn chsh_examples() {
        assert!((chsh_parameter(FRAC_1_SQRT_2) - 2.0).abs() < 1e-15);
        assert!((chsh_parameter(1.0) - 2.0 * SQRT_2).abs() < 1e-15);
        assert!((chsh_parameter(0.5) - SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn crossing_matches_pi_over_four() {
        let d = information_crossing();
        assert!((d - 0.5 * (1.0 - FRAC_1_SQRT_2)).abs() < 1e-9);
        let p = optimal_attack(d).unwrap();
        assert!((chsh_parameter(p.cos_alpha()) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn small_disturbance_slope_is_two_over_ln2() {
        let slope = information_slope_at(1e-5).unwrap();
        assert!((slope - 2.0 / LN_2).abs() < 1e-2, "{slope}");
        assert!((slope - 2.0 * LN_2).abs() > 1.0);
    }

    proptest! {
        #[test]
        fn relations_and_psd_hold(d in 0.0f64..=1.0, frac in -1.0f64..=1.0) {
            if let Ok(p) = IncoherentParams::new(d, frac * d) {
                prop_assert!((p.f() + p.disturbance() - 1.0).abs() < 1e-15);
                prop_assert!((p.f() - p.disturbance() - p.f1() - p.d1()).abs() < 1e-15);
                prop_assert!(is_psd(&gram4(&p), DEFAULT_PSD_TOL));
            }
        }

        #[test]
        fn bit_relabeling_leaves_gram_unchanged(d in 0.0f64..=0.5, frac in -1.0f64..=1.0) {
            if let Ok(p) = IncoherentParams::new(d, frac * d) {
                let g = gram4(&p);
                // E00 <-> E11, E01 <-> E10 reverses the index order.
                for i in 0..4 {
                    for j in 0..4 {
                        prop_assert_eq!(g.get(i, j), g.get(3 - i, 3 - j));
                    }
                }
            }
        }

        #[test]
        fn optimum_closed_forms(d in 0.0f64..=0.5) {
            let p = optimal_attack(d).unwrap();
            let pa = success_from_cos(1.0 - 2.0 * d);
            prop_assert!((eve_information(&p) - (1.0 - binary_entropy(pa).unwrap())).abs() < 1e-12);
            prop_assert!((eve_success(&p) - pa).abs() < 1e-12);
        }
    }
}
