//! Published values for the bundled example fans.

use toriclab::corpus;
use toriclab::divisorial::{k_divisoriality, quasiprojectivity_via_corollary, KDivInstance};
use toriclab::gale::{gale_transform, shephard_test, support_function_test};
use toriclab::linalg::{int_vec, same_lattice, IntVector};
use toriclab::quotient::{
    check_geometric_quotient, cox_lift, distinguished_points, image_fan, kajiwara_presentation, presentation_checks,
};
use toriclab::Cone;

fn rows(r: &[&[i64]]) -> Vec<IntVector> {
    r.iter().map(|x| int_vec(x)).collect()
}

#[test]
fn oda_fan_is_simplicial_complete_and_not_polytopal() {
    let f = corpus::fan("oda");
    assert!(f.validate().is_valid());
    assert!(f.is_simplicial() && f.is_complete() && f.is_nondegenerate());
    assert_eq!(f.cone_count(), 8);
    let s = shephard_test(&f).unwrap();
    let t = support_function_test(&f);
    assert!(!s.is_strongly_polytopal && !t.is_strongly_polytopal);
    assert!(s.certificate.is_some() && t.certificate.is_some());
    assert!(s.verify(&f, None) && t.verify(&f, None));
}

#[test]
fn oda_fan_gale_dual_has_rank_three() {
    let g = gale_transform(&corpus::fan("oda")).unwrap();
    assert_eq!(g.dual_rank(), 3);
    assert!(g.check_invariants());
}

#[test]
fn oda_cox_lift_is_quotient_by_three_torus() {
    let f = corpus::fan("oda");
    let lift = cox_lift(&f).unwrap();
    assert_eq!(lift.lifted.rank(), 6);
    assert_eq!(lift.lifted.cone_count(), 8);
    assert!(lift.lifted.cones().iter().all(|c| c.is_simplicial() && c.dim() == 3));
    assert_eq!(lift.kernel_basis.len(), 3);
    assert!(image_fan(&lift.q, &lift.lifted).unwrap().equivalent(&f));
    assert!(lift.lifted.equivalent(&corpus::fan("oda-coxlift")));
    assert_eq!(lift.q.matrix, corpus::map("oda-Q").matrix);
    assert!(check_geometric_quotient(&lift.lifted, &lift.q, &f).is_geometric_quotient());
}

#[test]
fn oda_quasiaffine_presentation() {
    let hat = corpus::fan("oda-hat");
    let p = corpus::map("oda-hat-P");
    let oda = corpus::fan("oda");
    let w = rows(&[
        &[1, 0, 0, 0, 0],
        &[0, 1, 0, 0, 0],
        &[-1, 0, 0, -1, 2],
        &[0, 0, 1, 0, 0],
        &[0, 0, 0, 1, 0],
        &[0, -2, -1, 1, 1],
    ]);
    for (wi, vi) in w.iter().zip(oda.rays()) {
        assert_eq!(&p.apply(wi), vi);
    }
    let sigma0 = Cone::new(5, w);
    assert!(sigma0.is_pointed());
    for c in hat.cones() {
        assert!(c.is_face_of(&sigma0));
    }
    let d = check_geometric_quotient(&hat, &p, &oda);
    assert!(d.is_geometric_quotient());
    assert_eq!(d.kernel_basis.len(), 2);
}

#[test]
fn nontwodiv_fan_shape() {
    let f = corpus::fan("nontwodiv");
    assert!(f.validate().is_valid());
    assert!(!f.is_simplicial() && !f.is_complete() && f.is_nondegenerate());
    assert_eq!(f.rank(), 4);
    assert_eq!(f.ray_count(), 9);
}

#[test]
fn nontwodiv_cartier_basis() {
    let f = corpus::fan("nontwodiv");
    let expected = rows(&[
        &[0, 0, 0, 0, 0, 1, 0, 0, 0],
        &[0, 0, 0, 0, 0, 0, 0, 1, 0],
        &[0, 0, 0, 0, 0, 0, 0, 0, 1],
        &[1, 0, 0, 0, 0, 0, 1, 0, 0],
        &[0, 1, 1, 0, 0, 0, 0, 0, 0],
        &[0, 0, 0, 1, 1, 0, 0, 0, 0],
        &[0, 1, 0, 1, 0, 0, 1, 0, 0],
    ]);
    let c = f.cartier_lattice();
    assert_eq!(c.rank(), 7);
    assert!(same_lattice(9, &c.basis, &expected));
    assert!(c.verify_witnesses(&f));
    assert!(same_lattice(9, &corpus::map("nontwodiv-Q1").matrix.to_rows(), &expected));
}

#[test]
fn nontwodiv_kajiwara_kernel() {
    let p = kajiwara_presentation(&corpus::fan("nontwodiv")).unwrap();
    let expected = rows(&[&[-1, -1, 1, 0, 0, 0, 1, 0, 0], &[-1, 0, 0, -1, 1, 0, 1, 0, 0]]);
    assert!(same_lattice(9, &p.kernel_basis, &expected));
    assert!(p.row_space_saturated);
    let checks = presentation_checks(&corpus::fan("nontwodiv"), &corpus::map("nontwodiv-Q1").matrix);
    assert!(checks.image_cone_pointed && checks.rays_extremal);
    assert!(checks.faces.iter().all(|&b| b));
}

#[test]
fn nontwodiv_distinguished_points() {
    let lift = cox_lift(&corpus::fan("nontwodiv")).unwrap();
    let pts = distinguished_points(&lift.lifted);
    assert_eq!(pts[2].coordinates, vec![1, 1, 1, 0, 0, 1, 1, 0, 1]);
    assert_eq!(pts[4].coordinates, vec![0, 1, 1, 1, 1, 1, 0, 1, 0]);
    // the removed set is 7-dimensional in C^9
    assert_eq!(lift.exceptional_codim, Some(2));
    let z = int_vec(&[3, -1, 1, -3, 0, 0, -1, -2, 1]);
    assert!(lift.q.apply(&z).iter().all(|x| x == &0.into()));
}

#[test]
fn nontwodiv_is_divisorial_but_not_two_divisorial() {
    let f = corpus::fan("nontwodiv");
    let r1 = k_divisoriality(&f, 1).unwrap();
    assert!(r1.verdict);
    assert!(r1.verify(&KDivInstance::new(&f, 1).unwrap()));
    let r2 = k_divisoriality(&f, 2).unwrap();
    assert!(!r2.verdict);
    assert!(r2.verify(&KDivInstance::new(&f, 2).unwrap()));
    let failing: Vec<_> = r2.failing().collect();
    assert_eq!(failing.len(), 1);
    assert_eq!(failing[0].cones, vec![2, 4]);
    assert_eq!(failing[0].certificate.as_ref().unwrap().relation, "2a1 + a9 = -3b4 - 2b8");
}

#[test]
fn cstar_quotient_onto_nontwodiv_fan() {
    let d = check_geometric_quotient(&corpus::fan("cstar-sigma"), &corpus::map("cstar-P"), &corpus::fan("nontwodiv"));
    assert!(d.is_geometric_quotient());
    assert!(d.cones_injective && d.image_is_target && d.bijective_on_cones);
    assert_eq!(d.kernel_basis.len(), 1);
    let k = &d.kernel_basis[0];
    assert!(k == &int_vec(&[1, -5, 2, 0, 2]) || k == &int_vec(&[-1, 5, -2, 0, -2]));
}

#[test]
fn cstar_source_is_quasiaffine() {
    let sigma = corpus::fan("cstar-sigma");
    let all = Cone::new(sigma.rank(), sigma.rays().to_vec());
    assert!(all.is_pointed());
    assert!(sigma.cones().iter().all(|c| c.is_face_of(&all)));
}

#[test]
fn small_projective_fans() {
    for name in ["p1", "p2", "p1xp1"] {
        let f = corpus::fan(name);
        assert!(shephard_test(&f).unwrap().is_strongly_polytopal, "{name}");
        assert!(support_function_test(&f).is_strongly_polytopal, "{name}");
        assert!(quasiprojectivity_via_corollary(&f).unwrap(), "{name}");
    }
    let lift = cox_lift(&corpus::fan("p1")).unwrap();
    assert_eq!(lift.q.matrix.to_rows(), rows(&[&[1, -1]]));
}

#[test]
fn oda_fan_is_not_quasiprojective_by_corollary() {
    assert!(!quasiprojectivity_via_corollary(&corpus::fan("oda")).unwrap());
}
