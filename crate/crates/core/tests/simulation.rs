mod common;

use eqm_core::frames::{synchronous, to_coi_ncr, to_coi_sys};
use eqm_core::eqmach::{aggregate, GroupPattern};
use eqm_core::model::Trajectory;
use eqm_core::sim::{refine_dt, simulate};
use eqm_core::{Scenario32, Trajectory32};

use common::{fixture, reference_state};

fn sample_at(traj: &Trajectory<f64>, t: f64) -> usize {
    traj.times
        .iter()
        .position(|&x| (x - t).abs() < 1e-9)
        .unwrap_or_else(|| panic!("no sample at {t}"))
}

#[test]
fn three_machine_angles_match_naive_integrator() {
    for name in ["three_machine_stable.json", "three_machine_unstable.json"] {
        let s = fixture(name);
        let traj = simulate(&s).unwrap();
        let k = sample_at(&traj, 1.0);
        let (d_ref, w_ref) = reference_state(&s, 10, 1.0);
        for i in 0..3 {
            let e = (traj.states[k].delta[i] - d_ref[i]).abs();
            assert!(e < 1e-6, "{name} machine {}: {e:e}", i + 1);
            assert!((traj.states[k].omega[i] - w_ref[i]).abs() < 1e-5);
        }
    }
}

#[test]
fn refined_run_agrees_with_naive_integrator() {
    let s = fixture("three_machine_stable.json");
    let traj = refine_dt(&s, 10).unwrap();
    let k = sample_at(&traj, 1.0);
    let (d_ref, _) = reference_state(&s, 10, 1.0);
    for i in 0..3 {
        // Same step and the same classical RK4 scheme.
        assert!((traj.states[k].delta[i] - d_ref[i]).abs() < 1e-11);
    }
}

#[test]
fn fault_stage_of_reference_matches_before_clearing() {
    let s = fixture("runaway.json");
    let traj = simulate(&s).unwrap();
    let k = sample_at(&traj, 0.3);
    let (d_ref, _) = reference_state(&s, 1, 0.3);
    for i in 0..3 {
        assert!((traj.states[k].delta[i] - d_ref[i]).abs() < 1e-12);
    }
}

#[test]
fn synchronous_frame_is_the_raw_trajectory() {
    let traj = simulate(&fixture("three_machine_stable.json")).unwrap();
    let syn = synchronous(&traj);
    for (k, st) in traj.states.iter().enumerate() {
        for i in 0..3 {
            assert_eq!(syn.tracks[i].delta[k], st.delta[i]);
            assert_eq!(syn.tracks[i].f[k], traj.pm[i] - traj.pe[k].pe[i]);
        }
    }
}

#[test]
fn coi_sys_weighted_sums_vanish() {
    let traj = simulate(&fixture("runaway.json")).unwrap();
    let sys = to_coi_sys(&traj);
    for k in 0..traj.len() {
        let (mut d, mut w, mut f) = (0.0, 0.0, 0.0);
        for t in &sys.tracks {
            d += t.inertia * t.delta[k];
            w += t.inertia * t.omega[k];
            f += t.f[k];
        }
        assert!(d.abs() < 1e-11 && w.abs() < 1e-11 && f.abs() < 1e-11, "sample {k}");
    }
}

#[test]
fn two_machine_singleton_relative_angle_is_exact() {
    let s = fixture("smib.json");
    let traj = simulate(&s).unwrap();
    let p = GroupPattern::from_critical(&[1], &traj.ids).unwrap();
    let ncr = to_coi_ncr(&traj, &p).unwrap();
    for (k, st) in traj.states.iter().enumerate() {
        assert_eq!(ncr.tracks[0].delta[k], st.delta[0] - st.delta[1]);
    }
    // Mirror scaling of the single-machine CR group.
    let eq = aggregate(&traj, &p).unwrap();
    let ratio = eq.m_sys / eq.m_ncr;
    for k in 0..traj.len() {
        let want = ratio * eq.cr_sys.delta[k];
        assert!((eq.cr_ncr.delta[k] - want).abs() <= 1e-12 * want.abs().max(1.0));
    }
}

#[test]
fn cr_ncr_angle_cross_validates_with_mirror() {
    let s = fixture("three_machine_unstable.json");
    let traj = simulate(&s).unwrap();
    let p = GroupPattern::from_critical(&[2, 3], &traj.ids).unwrap();
    let ncr = to_coi_ncr(&traj, &p).unwrap();
    let eq = aggregate(&traj, &p).unwrap();
    let ratio = eq.m_sys / eq.m_ncr;
    for k in 0..traj.len() {
        let want = ratio * eq.cr_sys.delta[k];
        assert!((ncr.tracks[0].delta[k] - want).abs() < 1e-9);
        if eq.cr_sys.omega[k].abs() > 1e-6 {
            let r = eq.cr_ncr.omega[k] / eq.cr_sys.omega[k];
            assert!((r - ratio).abs() < 1e-9 * ratio, "sample {k}: {r}");
        }
    }
}

#[test]
fn in_phase_identical_groups_keep_their_separation() {
    // Two copies of the same pair, one copy per group.
    let s = fixture("smib.json");
    let mut s4 = s.clone();
    s4.machines = [&s.machines[..], &s.machines[..]].concat();
    for (i, m) in s4.machines.iter_mut().enumerate() {
        m.id = i as u32 + 1;
        m.inertia = 1.0;
        m.pm = 0.0;
    }
    s4.initial_angles = vec![0.3, 0.3, 0.3, 0.3];
    s4.initial_speeds = vec![0.0; 4];
    let b = |x: f64| {
        let mut rows = vec![vec![x; 4]; 4];
        for (i, r) in rows.iter_mut().enumerate() {
            r[i] = 0.0;
        }
        eqm_core::model::ReducedNetwork::lossless(eqm_core::model::SquareMatrix::from_rows(rows).unwrap())
    };
    s4.networks.prefault = b(1.0);
    s4.networks.fault = b(0.5);
    s4.networks.postfault = b(0.8);
    let traj = simulate(&s4).unwrap();
    let p = GroupPattern::from_critical(&[1, 2], &traj.ids).unwrap();
    let ncr = to_coi_ncr(&traj, &p).unwrap();
    assert!(ncr.tracks[0].delta.iter().all(|&d| d == 0.0));
}

#[test]
fn single_precision_aliases_follow_double() {
    let s = fixture("three_machine_stable.json");
    let s32: Scenario32 = s.cast();
    let t32: Trajectory32 = simulate(&s32).unwrap();
    let t64 = simulate(&s).unwrap();
    assert_eq!(t32.len(), t64.len());
    let k = t64.len() - 1;
    for i in 0..3 {
        let d = (t32.states[k].delta[i] as f64 - t64.states[k].delta[i]).abs();
        assert!(d < 1e-2, "machine {}: {d}", i + 1);
    }
}
