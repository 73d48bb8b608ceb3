use nalgebra::{Matrix3, Vector3};
use proptest::prelude::*;

use dpsim::approximators::{
    anfis_forward, AdaptiveWeights, AnfisModel, AnfisRule, BellMembership, RbfGridSpec,
};
use dpsim::control::{
    backstep_control, saturate, ultimate_bound, BackstepGains, BoundInputs, ErrorState,
    SaturationLimits,
};
use dpsim::vessel::{rotation_matrix, wrap_angle, ControlInput};

fn angle() -> impl Strategy<Value = f64> {
    -50.0f64..50.0
}

fn vec3(scale: f64) -> impl Strategy<Value = Vector3<f64>> {
    prop::array::uniform3(-scale..scale).prop_map(Vector3::from)
}

proptest! {
    #[test]
    fn rotations_compose(a in angle(), b in angle()) {
        let diff = rotation_matrix(a) * rotation_matrix(b) - rotation_matrix(a + b);
        prop_assert!(diff.amax() < 1e-12);
    }

    #[test]
    fn rotation_preserves_length(psi in angle(), v in vec3(1e4)) {
        let w = rotation_matrix(psi) * v;
        prop_assert!((w.norm() - v.norm()).abs() <= 1e-12 * v.norm().max(1.0));
        prop_assert_eq!(w[2], v[2]);
    }

    #[test]
    fn wrapped_angle_in_range_and_equivalent(a in -1e3f64..1e3) {
        let w = wrap_angle(a);
        prop_assert!(w > -std::f64::consts::PI && w <= std::f64::consts::PI);
        prop_assert!((w.sin() - a.sin()).abs() < 1e-9 && (w.cos() - a.cos()).abs() < 1e-9);
    }

    #[test]
    fn saturation_bounds_and_idempotence(tau in vec3(1e8), lim in prop::array::uniform3(1.0f64..1e7)) {
        let limits = SaturationLimits::new(Vector3::from(lim)).unwrap();
        let once = saturate(&ControlInput::new(tau), &limits);
        for i in 0..3 {
            prop_assert!(once.tau[i].abs() <= lim[i]);
        }
        prop_assert_eq!(saturate(&once, &limits), once);
    }

    #[test]
    fn anfis_normalized_firing_sums_to_one(
        params in prop::collection::vec((0.2f64..3.0, 0.5f64..4.0, -2.0f64..2.0), 4),
        rule_sel in prop::collection::vec((0usize..2, 0usize..2), 1..5),
        x in prop::array::uniform2(-3.0f64..3.0),
    ) {
        let mf: Vec<BellMembership> = params
            .iter()
            .map(|&(a, b, c)| BellMembership::new(a, b, c).unwrap())
            .collect();
        let memberships = vec![mf[..2].to_vec(), mf[2..].to_vec()];
        let rules = rule_sel
            .iter()
            .map(|&(i, j)| AnfisRule::two_input([i, j], 1.0, -1.0, 0.5))
            .collect();
        let model = AnfisModel::new(memberships, rules).unwrap();
        let layers = anfis_forward(&model, &x).unwrap();
        prop_assert!((layers.normalized.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(layers.normalized.iter().all(|&w| (0.0..=1.0).contains(&w)));
    }

    #[test]
    fn basis_positive_and_bounded(z in prop::array::uniform9(-20.0f64..20.0)) {
        let spec = RbfGridSpec { points_per_dim: 2, ..RbfGridSpec::default() };
        let net = spec.build().unwrap();
        let mut out = vec![0.0; net.node_count()];
        net.basis_into(&z, &mut out).unwrap();
        let peak = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        prop_assert!(out.iter().all(|&g| (0.0..=peak).contains(&g)));
    }

    #[test]
    fn control_is_affine_in_weights(
        psi in angle(),
        z1 in vec3(20.0),
        z2 in vec3(2.0),
        basis in prop::collection::vec(0.0f64..0.4, 8),
        w in prop::collection::vec(-5.0f64..5.0, 24),
        s in -3.0f64..3.0,
    ) {
        let gains = BackstepGains::reference();
        let mk = |k: f64| AdaptiveWeights {
            theta: [0, 1, 2].map(|i| w[i * 8..(i + 1) * 8].iter().map(|v| v * k).collect()),
        };
        let at = |k: f64| backstep_control(&gains, psi, &z1, &z2, &basis, &mk(k)).unwrap().tau;
        let lhs = at(s) - at(0.0);
        let rhs = (at(1.0) - at(0.0)) * s;
        prop_assert!((lhs - rhs).amax() <= 1e-9 * (1.0 + rhs.amax()));
    }

    /// Along the flow, d(alpha1)/dt matches a central difference of alpha1.
    #[test]
    fn alpha1_rate_matches_difference(
        eta in vec3(10.0),
        nu in vec3(0.5),
        eta_d in vec3(5.0),
    ) {
        let k1 = BackstepGains::reference().k1;
        let h = 1e-6;
        let eta_rate = rotation_matrix(eta[2]) * nu;
        let at = |sgn: f64| ErrorState::compute(&k1, &(eta + eta_rate * (sgn * h)), &nu, &eta_d).alpha1;
        let fd = (at(1.0) - at(-1.0)) / (2.0 * h);
        let exact = ErrorState::compute(&k1, &eta, &nu, &eta_d).alpha1_dot;
        prop_assert!((fd - exact).amax() <= 1e-6 * (1.0 + exact.amax()));
    }

    /// With `V2a(0) >= c/phi` the bound never increases in time.
    #[test]
    fn ultimate_bound_nonincreasing(
        k1 in prop::array::uniform3(0.01f64..2.0),
        k2 in prop::array::uniform3(1.0f64..1e5),
        e_star in 0.0f64..100.0,
        excess in 0.0f64..1e4,
        t0 in 0.0f64..500.0,
        dt in 0.0f64..500.0,
    ) {
        let inputs = BoundInputs {
            k1: Matrix3::from_diagonal(&Vector3::from(k1)),
            k2: Matrix3::from_diagonal(&Vector3::from(k2)),
            mass: Matrix3::from_diagonal(&Vector3::new(5.3e6, 8.3e6, 3.7e9)),
            sigma: [2.13, 2.13, 0.302],
            e_star,
            theta_m: [1.0, 1.0, 1.0],
            beta: f64::INFINITY,
        };
        let probe = ultimate_bound(&inputs, 0.0, 0.0).unwrap();
        let v0 = probe.c_over_phi + excess;
        let a = ultimate_bound(&inputs, v0, t0).unwrap();
        let b = ultimate_bound(&inputs, v0, t0 + dt).unwrap();
        prop_assert!(b.z1_bound <= a.z1_bound * (1.0 + 1e-12));
        prop_assert!(b.z1_bound >= probe.asymptote * (1.0 - 1e-12));
    }
}
