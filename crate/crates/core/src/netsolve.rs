//! Classical-model electrical power injections.

use crate::error::{Error, Result};
use crate::model::{MachineParams, PowerVector, ReducedNetwork};
use crate::scalar::Real;

/// P_ei = E_i^2 G_ii + sum_{j != i} E_i E_j (B_ij sin(d_i - d_j) + G_ij cos(d_i - d_j)).
pub fn electrical_power<T: Real>(
    angles: &[T],
    net: &ReducedNetwork<T>,
    machines: &[MachineParams<T>],
) -> Result<PowerVector<T>> {
    let n = machines.len();
    if angles.len() != n || net.dim() != n || net.conductance.dim() != n {
        return Err(Error::Dimension(format!(
            "{} angles, {} machines, {}x{} network",
            angles.len(),
            n,
            net.dim(),
            net.dim()
        )));
    }
    let mut pe = vec![T::zero(); n];
    injections_into(angles, net, machines, &mut pe);
    Ok(PowerVector { pe })
}

/// Unchecked kernel used by the integrator.
pub(crate) fn injections_into<T: Real>(
    angles: &[T],
    net: &ReducedNetwork<T>,
    machines: &[MachineParams<T>],
    out: &mut [T],
) {
    let n = machines.len();
    let (g, b) = (&net.conductance, &net.susceptance);
    for i in 0..n {
        let ei = machines[i].emf;
        let mut p = ei * ei * g.get(i, i);
        for j in 0..n {
            if j == i {
                continue;
            }
            let (bij, gij) = (b.get(i, j), g.get(i, j));
            if bij == T::zero() && gij == T::zero() {
                continue;
            }
            let (s, c) = (angles[i] - angles[j]).sin_cos();
            p = p + ei * machines[j].emf * (bij * s + gij * c);
        }
        out[i] = p;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SquareMatrix;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn machines(emf: &[f64]) -> Vec<MachineParams<f64>> {
        emf.iter()
            .enumerate()
            .map(|(i, &e)| MachineParams {
                id: i as u32 + 1,
                inertia: 1.0,
                emf: e,
                pm: 0.3,
            })
            .collect()
    }

    fn two_bus(b12: f64) -> ReducedNetwork<f64> {
        ReducedNetwork::lossless(SquareMatrix::from_rows(vec![vec![0.0, b12], vec![b12, 0.0]]).unwrap())
    }

    #[test]
    fn isolated_machine_injects_nothing() {
        let net = ReducedNetwork::lossless(SquareMatrix::zeros(1));
        let p = electrical_power(&[0.7], &net, &machines(&[1.2])).unwrap();
        assert_eq!(p.pe, vec![0.0]);
    }

    #[test]
    fn in_phase_pair_injects_nothing() {
        let p = electrical_power(&[0.4, 0.4], &two_bus(1.0), &machines(&[1.0, 1.0])).unwrap();
        assert_eq!(p.pe, vec![0.0, 0.0]);
    }

    #[test]
    fn pair_at_thirty_degrees() {
        // 1 * 1 * 0.5 * sin(pi/6) = 0.25 by hand.
        let p = electrical_power(&[PI / 6.0, 0.0], &two_bus(0.5), &machines(&[1.0, 1.0])).unwrap();
        assert!((p.pe[0] - 0.25).abs() < 1e-15);
        assert!((p.pe[1] + 0.25).abs() < 1e-15);
    }

    #[test]
    fn self_conductance_term() {
        let mut g = SquareMatrix::zeros(2);
        g.set(0, 0, 0.2);
        let net = ReducedNetwork {
            conductance: g,
            susceptance: SquareMatrix::zeros(2),
        };
        let p = electrical_power(&[0.0, 1.0], &net, &machines(&[2.0, 1.0])).unwrap();
        assert!((p.pe[0] - 0.8).abs() < 1e-15);
        assert_eq!(p.pe[1], 0.0);
    }

    #[test]
    fn dimension_mismatch() {
        let err = electrical_power(&[0.0], &two_bus(1.0), &machines(&[1.0, 1.0])).unwrap_err();
        assert!(matches!(err, Error::Dimension(_)));
    }

    fn lossless_net(n: usize, coup: &[f64]) -> ReducedNetwork<f64> {
        let mut b = SquareMatrix::zeros(n);
        let mut k = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                b.set(i, j, coup[k]);
                b.set(j, i, coup[k]);
                k += 1;
            }
        }
        ReducedNetwork::lossless(b)
    }

    proptest! {
        #[test]
        fn lossless_injections_sum_to_zero(
            angles in prop::collection::vec(-6.0f64..6.0, 5),
            emf in prop::collection::vec(0.8f64..1.3, 5),
            coup in prop::collection::vec(0.0f64..3.0, 10),
        ) {
            let p = electrical_power(&angles, &lossless_net(5, &coup), &machines(&emf)).unwrap();
            let s: f64 = p.pe.iter().sum();
            prop_assert!(s.abs() <= 1e-12, "sum = {s}");
        }

        #[test]
        fn uniform_angle_shift_leaves_injections_unchanged(
            angles in prop::collection::vec(-3.0f64..3.0, 4),
            coup in prop::collection::vec(0.0f64..2.0, 6),
            gdiag in prop::collection::vec(0.0f64..0.5, 4),
            shift in -10.0f64..10.0,
        ) {
            let mut net = lossless_net(4, &coup);
            for (i, g) in gdiag.iter().enumerate() {
                net.conductance.set(i, i, *g);
                net.conductance.set(i, (i + 1) % 4, 0.05);
                net.conductance.set((i + 1) % 4, i, 0.05);
            }
            let m = machines(&[1.0, 1.1, 0.9, 1.05]);
            let base = electrical_power(&angles, &net, &m).unwrap();
            let shifted: Vec<f64> = angles.iter().map(|a| a + shift).collect();
            let moved = electrical_power(&shifted, &net, &m).unwrap();
            for (a, b) in base.pe.iter().zip(&moved.pe) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }
    }
}
