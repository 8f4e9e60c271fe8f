use proptest::prelude::*;

use rqcm::ensemble::{
    mode_rotation, sample_rqcm, swap_subsystems, symplectic_form, GoeSpec, ModeBipartition, RngSeed,
};
use rqcm::extend::{solve_sandwich, witness_margins, FeasibilityStatus, MaxK, SandwichMethod, SandwichProblem};
use rqcm::linalg::{herm_eigenvalues, sym_eigen, sym_eigenvalues, HermitianMatrix, Matrix, SymmetricMatrix};
use rqcm::spectra::{ppt_defect, qcm_defect, symplectic_eigenvalues};
use rqcm::stats::histogram;

fn sym_from(d: usize, v: &[f64]) -> SymmetricMatrix {
    SymmetricMatrix::from_fn(d, |i, j| v[i * d + j] + v[j * d + i]).unwrap()
}

fn psd_from(d: usize, v: &[f64]) -> HermitianMatrix {
    let a = Matrix::from_fn(d, d, |i, j| num_complex::Complex64::new(v[i * d + j], v[(j * d + i + 1) % v.len()]));
    HermitianMatrix::new(a.matmul(&a.adjoint())).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eigen_reconstructs(d in 1usize..8, v in prop::collection::vec(-3.0f64..3.0, 64)) {
        let s = sym_from(d, &v);
        let e = sym_eigen(&s).unwrap();
        prop_assert!(e.residual(s.as_matrix()) <= 1e-10 * (1.0 + s.as_matrix().max_abs()));
        prop_assert!(e.orthogonality_defect() <= 1e-12);
        let tr: f64 = e.eigenvalues.iter().sum();
        prop_assert!((tr - s.as_matrix().trace()).abs() <= 1e-10 * (1.0 + s.as_matrix().max_abs()));
        prop_assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn rqcm_saturates_heisenberg(n in 1usize..5, sigma in 0.05f64..5.0, seed in any::<u64>(), norm in any::<bool>()) {
        let q = sample_rqcm(&GoeSpec::new(n, sigma, norm).unwrap(), RngSeed::new(seed, 0)).unwrap();
        let d = qcm_defect(q.matrix()).unwrap();
        prop_assert!(d.abs() <= 1e-8 * (1.0 + sigma), "defect {}", d);
        let (sp, _) = symplectic_eigenvalues(q.matrix(), 1e-8).unwrap();
        prop_assert!(sp[0] >= 1.0 - 1e-7, "smallest symplectic eigenvalue {}", sp[0]);
    }

    #[test]
    fn ortho_symplectic_invariance(n in 1usize..4, seed in any::<u64>(), angles in prop::collection::vec(-3.2f64..3.2, 4)) {
        let q = sample_rqcm(&GoeSpec::new(n, 1.0, false).unwrap(), RngSeed::new(seed, 1)).unwrap();
        let o = mode_rotation(&angles[..n]);
        let r = q.matrix().congruence(&o);
        let a = sym_eigenvalues(q.matrix()).unwrap();
        let b = sym_eigenvalues(&r).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs()));
        }
        prop_assert!((qcm_defect(&r).unwrap() - qcm_defect(q.matrix()).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn ppt_defect_symmetric_under_swap(m in 1usize..3, l in 1usize..3, seed in any::<u64>()) {
        let part = ModeBipartition::new(m, l).unwrap();
        let q = sample_rqcm(&GoeSpec::new(m + l, 1.0, false).unwrap(), RngSeed::new(seed, 2)).unwrap();
        let a = ppt_defect(q.matrix(), part).unwrap();
        let b = ppt_defect(&swap_subsystems(q.matrix(), part).unwrap(), part.swapped()).unwrap();
        prop_assert!((a - b).abs() <= 1e-10);
    }

    #[test]
    fn sandwich_feasible_around_real_point(
        d in 1usize..5,
        x in prop::collection::vec(-2.0f64..2.0, 25),
        p in prop::collection::vec(-1.0f64..1.0, 25),
        q in prop::collection::vec(-1.0f64..1.0, 25),
    ) {
        let x0 = sym_from(d, &x).to_hermitian();
        let lower = x0.sub(&psd_from(d, &p)).shift_diag(-0.1);
        let upper = x0.add(&psd_from(d, &q)).shift_diag(0.1);
        for method in [SandwichMethod::InteriorPoint, SandwichMethod::Dykstra] {
            let pr = SandwichProblem::new(lower.clone(), upper.clone()).unwrap().with_method(method);
            let r = solve_sandwich(&pr).unwrap();
            prop_assert_eq!(r.status, FeasibilityStatus::Feasible);
            let (lo, hi) = witness_margins(r.witness.as_ref().unwrap(), &lower, &upper).unwrap();
            prop_assert!(lo >= -1e-8 && hi >= -1e-8);
        }
    }

    #[test]
    fn sandwich_infeasible_when_bounds_cross(d in 1usize..5, x in prop::collection::vec(-2.0f64..2.0, 25), gap in 0.01f64..2.0) {
        let u = sym_from(d, &x).to_hermitian();
        let l = u.shift_diag(gap);
        let r = solve_sandwich(&SandwichProblem::new(l, u).unwrap()).unwrap();
        prop_assert_eq!(r.status, FeasibilityStatus::Infeasible);
        prop_assert!(r.residual >= gap - 1e-6, "residual {} gap {}", r.residual, gap);
    }

    #[test]
    fn histogram_conserves_mass(v in prop::collection::vec(-50.0f64..50.0, 1..400), bins in 1usize..60) {
        let h = histogram(&v, bins, None).unwrap();
        prop_assert_eq!(h.counts.iter().sum::<u64>(), h.total);
        prop_assert_eq!(h.total as usize, v.len());
        prop_assert!((h.mass() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn max_k_text_roundtrip(k in 1usize..1000, at_least in any::<bool>()) {
        let m = if at_least { MaxK::AtLeast(k) } else { MaxK::Exact(k) };
        prop_assert_eq!(m.to_string().parse::<MaxK>().unwrap(), m);
    }
}

#[test]
fn symplectic_form_squares_to_minus_identity() {
    for n in 1..5 {
        let j = symplectic_form(n).unwrap().j;
        let jj = j.matmul(&j);
        let eye = Matrix::<f64>::identity(2 * n);
        assert!(jj.add(&eye).max_abs() == 0.0);
        let ev = herm_eigenvalues(&symplectic_form(n).unwrap().ij).unwrap();
        assert!(ev.iter().all(|e| (e.abs() - 1.0).abs() < 1e-14));
    }
}
