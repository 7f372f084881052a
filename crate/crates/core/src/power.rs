//! Per-harmonic power fractions and efficiency sweeps.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::Result;
use crate::geometry::ScatterScenario;
use crate::mode_matching::{solve, ModalSolution};
use crate::profile::ImpedanceProfile;

#[derive(Debug, Clone, PartialEq)]
pub struct PowerBudget {
    /// `p_n = |B_n|^2 cos(theta_r,n) / cos(theta_i)` for every propagating order.
    pub fractions: BTreeMap<i32, f64>,
    pub total_reflected: f64,
    /// `1 - total_reflected`; positive means absorbed, negative means net gain.
    pub surface_net: f64,
    pub target_index: i32,
    pub efficiency: f64,
    /// Grazing orders, counted with `p_n = 0`.
    pub grazing: Vec<i32>,
    /// Propagating orders outside the truncation window, counted with `p_n = 0`.
    pub unresolved: Vec<i32>,
}

pub fn power_budget(solution: &ModalSolution, scenario: &ScatterScenario) -> PowerBudget {
    let cos_i = scenario.theta_i().cos();
    let mut grazing = Vec::new();
    let mut unresolved = Vec::new();
    let fractions: BTreeMap<i32, f64> = scenario
        .propagating_indices()
        .into_iter()
        .map(|n| {
            let h = scenario.harmonic(n);
            if h.grazing {
                grazing.push(n);
            }
            let p = match solution.amplitude(n) {
                Some(b) if !h.grazing => b.norm_sqr() * h.cos_angle() / cos_i,
                Some(_) => 0.0,
                None => {
                    unresolved.push(n);
                    0.0
                }
            };
            (n, p)
        })
        .collect();
    let total_reflected: f64 = fractions.values().sum();
    let target_index = scenario.design_order();
    PowerBudget {
        efficiency: fractions.get(&target_index).copied().unwrap_or(0.0),
        surface_net: 1.0 - total_reflected,
        total_reflected,
        target_index,
        fractions,
        grazing,
        unresolved,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyPoint {
    pub efficiency: f64,
    pub total_reflected: f64,
    pub residual_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyRow {
    /// Radians.
    pub theta_r: f64,
    pub outcome: Result<EfficiencyPoint>,
}

/// Re-derives the scenario (and hence the period) for every `theta_r` and
/// builds the profile with `factory`.
pub fn efficiency_sweep<F>(factory: F, template: &ScatterScenario, theta_r_list: &[f64]) -> Vec<EfficiencyRow>
where
    F: Fn(&ScatterScenario) -> Result<ImpedanceProfile> + Sync,
{
    theta_r_list
        .par_iter()
        .map(|&theta_r| {
            let outcome = template.with_theta_r(theta_r).and_then(|s| {
                let profile = factory(&s)?;
                let sol = solve(&profile, &s)?;
                let budget = power_budget(&sol, &s);
                Ok(EfficiencyPoint {
                    efficiency: budget.efficiency,
                    total_reflected: budget.total_reflected,
                    residual_norm: sol.diagnostics.residual_norm,
                })
            });
            EfficiencyRow { theta_r, outcome }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::profile::{constant, z1_cotangent, z2_geometric_optics, z3_global_optimal};
    use num_complex::Complex64;

    fn default_scenario() -> ScatterScenario {
        ScatterScenario::from_angles(28e9, 0.0, 70f64.to_radians(), 30, 5.0).unwrap()
    }

    #[test]
    fn pec_mirror() {
        let s = default_scenario();
        let sol = solve(&constant(s.period(), Complex64::new(0.0, 0.0)).unwrap(), &s).unwrap();
        let b = power_budget(&sol, &s);
        assert_eq!(b.fractions.keys().copied().collect::<Vec<_>>(), vec![-1, 0, 1]);
        assert_eq!(b.fractions[&0], 1.0);
        assert_eq!(b.efficiency, 0.0);
        assert_eq!(b.surface_net, 0.0);
        assert_eq!(b.target_index, 1);
    }

    #[test]
    fn global_optimal_is_lossless_overall() {
        let s = default_scenario();
        let b = power_budget(&solve(&z3_global_optimal(&s).unwrap(), &s).unwrap(), &s);
        assert!((b.efficiency - 1.0).abs() < 2e-3);
        assert!(b.surface_net.abs() < 2e-3);
        assert_eq!(b.surface_net + b.total_reflected, 1.0);
    }

    #[test]
    fn geometric_optics_absorbs() {
        let s = default_scenario();
        let b = power_budget(&solve(&z2_geometric_optics(&s).unwrap(), &s).unwrap(), &s);
        let c70 = 70f64.to_radians().cos();
        assert!((b.efficiency - c70).abs() < 1e-3);
        assert!((b.surface_net - (1.0 - c70)).abs() < 1e-3);
    }

    #[test]
    fn reactive_profile_conserves_power() {
        let s = default_scenario();
        let b = power_budget(&solve(&z1_cotangent(&s).unwrap(), &s).unwrap(), &s);
        assert!(b.surface_net.abs() < 1e-9, "{b:?}");
        assert!(b.efficiency < 1.0 && b.efficiency > 0.5);
        assert!(b.fractions.values().all(|&p| p >= 0.0));
    }

    #[test]
    fn negative_steering_targets_minus_one() {
        let s = ScatterScenario::from_angles(28e9, 10f64.to_radians(), -40f64.to_radians(), 20, 5.0).unwrap();
        let b = power_budget(&solve(&z3_global_optimal(&s).unwrap(), &s).unwrap(), &s);
        assert_eq!(b.target_index, -1);
        assert!((b.efficiency - 1.0).abs() < 2e-3);
    }

    #[test]
    fn sweeps() {
        let t = default_scenario();
        let angles: Vec<f64> = [30.0f64, 50.0, 70.0].iter().map(|d| d.to_radians()).collect();
        for row in efficiency_sweep(z2_geometric_optics, &t, &angles) {
            let p = row.outcome.unwrap();
            assert!((p.efficiency - row.theta_r.cos()).abs() < 1e-3);
        }
        for row in efficiency_sweep(z3_global_optimal, &t, &angles) {
            assert!((row.outcome.unwrap().efficiency - 1.0).abs() < 2e-3);
        }
        for row in efficiency_sweep(z1_cotangent, &t, &angles) {
            let p = row.outcome.unwrap();
            assert!(p.efficiency < 1.0);
            assert!((p.total_reflected - 1.0).abs() < 1e-9);
        }
        let rows = efficiency_sweep(z2_geometric_optics, &t, &[0.0, 1.0]);
        assert!(matches!(rows[0].outcome, Err(Error::DegenerateGeometry)));
        assert!(rows[1].outcome.is_ok());
    }
}
