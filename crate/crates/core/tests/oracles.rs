//! Cross-checks against small independent implementations written with machine integers.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use toriclab::corpus;
use toriclab::gale::{shephard_test, support_function_test};
use toriclab::linalg::{int_vec, integer_kernel_basis, strict_lp_feasibility, IntMatrix, IntVector, Rational};
use toriclab::random::random_fan_3d_batch;
use toriclab::{Cone, Fan};

fn small(v: &IntVector) -> Vec<i64> {
    v.iter().map(|x| x.to_i64().expect("small entry")).collect()
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, bound: i64) -> Vec<Vec<i64>> {
    (0..rows).map(|_| (0..cols).map(|_| rng.random_range(-bound..=bound)).collect()).collect()
}

fn to_int_matrix(m: &[Vec<i64>], cols: usize) -> IntMatrix {
    let rows: Vec<IntVector> = m.iter().map(|r| int_vec(r)).collect();
    IntMatrix::from_rows(cols, &rows)
}

/// Rank by fraction-free elimination in i128.
fn rank_i128(m: &[Vec<i64>]) -> usize {
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let cols = a.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..a.len()).find(|&i| a[i][c] != 0) else { continue };
        a.swap(r, p);
        for i in 0..a.len() {
            if i != r && a[i][c] != 0 {
                let (f, g) = (a[i][c], a[r][c]);
                for j in 0..cols {
                    a[i][j] = a[i][j] * g - a[r][j] * f;
                }
                let d = a[i].iter().fold(0i128, |d, &x| gcd(d, x));
                if d > 1 {
                    a[i].iter_mut().for_each(|x| *x /= d);
                }
            }
        }
        r += 1;
    }
    r
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Membership in the lattice spanned by rows in echelon form with positive pivots.
fn in_echelon_lattice(basis: &[Vec<i64>], x: &[i64]) -> bool {
    let mut r: Vec<i64> = x.to_vec();
    for row in basis {
        let p = row.iter().position(|&v| v != 0).expect("nonzero row");
        if r[..p].iter().any(|&v| v != 0) {
            return false;
        }
        if r[p] % row[p] != 0 {
            return false;
        }
        let q = r[p] / row[p];
        for (a, b) in r.iter_mut().zip(row) {
            *a -= q * b;
        }
    }
    r.iter().all(|&v| v == 0)
}

#[test]
fn integer_kernel_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let rows = rng.random_range(1..=3);
        let cols = 4;
        let m = random_matrix(&mut rng, rows, cols, 3);
        let basis: Vec<Vec<i64>> = integer_kernel_basis(&to_int_matrix(&m, cols)).iter().map(small).collect();
        assert_eq!(basis.len(), cols - rank_i128(&m));
        for b in &basis {
            assert!(m.iter().all(|r| r.iter().zip(b).map(|(x, y)| x * y).sum::<i64>() == 0));
        }
        let range = -3..=3;
        for a in range.clone() {
            for b in range.clone() {
                for c in range.clone() {
                    for d in range.clone() {
                        let x = [a, b, c, d];
                        let in_kernel = m.iter().all(|r| r.iter().zip(&x).map(|(p, q)| p * q).sum::<i64>() == 0);
                        if in_kernel {
                            assert!(in_echelon_lattice(&basis, &x), "{x:?} missing from kernel of {m:?}");
                        }
                    }
                }
            }
        }
    }
}

/// `a` is Cartier on a full-dimensional simplicial cone iff `V^{-1}(-a)` is integral,
/// checked by Cramer's rule.
fn cartier_by_cramer(fan: &Fan, a: &[i64]) -> bool {
    let n = fan.rank();
    fan.max_cones().iter().all(|idx| {
        let v: Vec<Vec<i64>> = idx.iter().map(|&i| small(&fan.rays()[i])).collect();
        let det = det_i128(&v);
        assert_ne!(det, 0);
        (0..n).all(|col| {
            let mut w = v.clone();
            for (r, &i) in idx.iter().enumerate() {
                w[r][col] = -a[i];
            }
            det_i128(&w) % det == 0
        })
    })
}

fn det_i128(m: &[Vec<i64>]) -> i128 {
    let n = m.len();
    if n == 1 {
        return m[0][0] as i128;
    }
    (0..n)
        .map(|c| {
            let minor: Vec<Vec<i64>> = m[1..]
                .iter()
                .map(|r| r.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, &x)| x).collect())
                .collect();
            let s = if c % 2 == 0 { 1 } else { -1 };
            s * m[0][c] as i128 * det_i128(&minor)
        })
        .sum()
}

#[test]
fn cartier_lattice_matches_cramer_on_simplicial_fans() {
    let weighted = Fan::from_i64(2, &[&[1, 0], &[0, 1], &[-1, -2]], &[&[0, 1], &[1, 2], &[0, 2]]).unwrap();
    let mut fans = vec![weighted, corpus::fan("p2"), corpus::fan("p1xp1"), corpus::fan("oda")];
    fans.extend(random_fan_3d_batch(6, 3, 5).unwrap());
    for fan in &fans {
        let d = fan.ray_count();
        let lattice = fan.cartier_lattice();
        let mut rng = ChaCha8Rng::seed_from_u64(d as u64);
        for _ in 0..300 {
            let a: Vec<i64> = (0..d).map(|_| rng.random_range(-2..=2)).collect();
            let expected = cartier_by_cramer(fan, &a);
            let big = int_vec(&a);
            assert_eq!(fan.is_cartier(&big), expected, "{a:?}");
            assert_eq!(lattice.contains(&big), expected, "{a:?}");
        }
    }
}

#[test]
fn weighted_plane_cartier_lattice_has_index_two() {
    let f = Fan::from_i64(2, &[&[1, 0], &[0, 1], &[-1, -2]], &[&[0, 1], &[1, 2], &[0, 2]]).unwrap();
    assert!(!f.is_cartier(&int_vec(&[1, 0, 0])));
    assert!(f.is_cartier(&int_vec(&[2, 0, 0])));
    assert!(f.is_cartier(&int_vec(&[0, 1, 0])));
    assert!(f.is_cartier(&int_vec(&[1, 0, 1])));
}

fn cross(a: &[i64], b: &[i64]) -> i64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Membership in the planar cone spanned by two non-opposite vectors.
fn in_planar_cone(a: &[i64], b: &[i64], x: &[i64]) -> bool {
    let s = cross(a, b);
    if s == 0 {
        // a and b on one ray
        return cross(a, x) == 0 && a[0] * x[0] + a[1] * x[1] >= 0;
    }
    cross(a, x) * s >= 0 && cross(x, b) * s >= 0
}

#[test]
fn planar_cone_intersections_match_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let random_cone = |rng: &mut ChaCha8Rng| loop {
        let a: Vec<i64> = (0..2).map(|_| rng.random_range(-3..=3)).collect();
        let b: Vec<i64> = (0..2).map(|_| rng.random_range(-3..=3)).collect();
        let opposite = cross(&a, &b) == 0 && a[0] * b[0] + a[1] * b[1] < 0;
        if a != [0, 0] && b != [0, 0] && !opposite {
            return (a, b);
        }
    };
    for _ in 0..60 {
        let (a1, b1) = random_cone(&mut rng);
        let (a2, b2) = random_cone(&mut rng);
        let c1 = Cone::new(2, vec![int_vec(&a1), int_vec(&b1)]);
        let c2 = Cone::new(2, vec![int_vec(&a2), int_vec(&b2)]);
        let meet = c1.intersect(&c2);
        for x in -6..=6 {
            for y in -6..=6 {
                let p = [x, y];
                let q: Vec<Rational> = p.iter().map(|&v| Rational::from_integer(BigInt::from(v))).collect();
                let expected = in_planar_cone(&a1, &b1, &p) && in_planar_cone(&a2, &b2, &p);
                assert_eq!(meet.contains(&q), expected, "{a1:?},{b1:?} ∩ {a2:?},{b2:?} at {p:?}");
                assert_eq!(c1.contains(&q), in_planar_cone(&a1, &b1, &p));
            }
        }
    }
}

#[test]
fn completeness_matches_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut fans: Vec<Fan> = corpus::complete_fans();
    fans.extend(random_fan_3d_batch(8, 10, 2).unwrap());
    for fan in &fans {
        assert!(fan.is_complete());
        for _ in 0..200 {
            let x: Vec<Rational> =
                (0..fan.rank()).map(|_| Rational::from_integer(BigInt::from(rng.random_range(-50..=50)))).collect();
            assert!(fan.locate(&x).is_some(), "{x:?} uncovered");
        }
    }
    // Dropping one maximal cone leaves an uncovered sample point.
    let oda = corpus::fan("oda");
    let cones: Vec<Vec<usize>> = oda.max_cones()[1..].to_vec();
    let partial = Fan::new(3, oda.rays().to_vec(), cones).unwrap();
    assert!(!partial.is_complete());
    let inside = oda.cone(0).generator_sum();
    assert!(partial.locate(&inside).is_none());
    assert!(!corpus::fan("nontwodiv").is_complete());
}

/// Facets of the convex hull of points in general position, as index triples, by
/// testing every triple against every other point.
fn brute_force_hull(pts: &[[i64; 3]]) -> Option<Vec<Vec<usize>>> {
    let mut tris = Vec::new();
    let n = pts.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let u = sub(pts[j], pts[i]);
                let v = sub(pts[k], pts[i]);
                let normal = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
                if normal == [0, 0, 0] {
                    return None;
                }
                let side = |p: [i64; 3]| dot3(normal, sub(p, pts[i]));
                let signs: Vec<i64> =
                    (0..n).filter(|&l| l != i && l != j && l != k).map(|l| side(pts[l]).signum()).collect();
                if signs.contains(&0) {
                    return None;
                }
                if signs.iter().all(|&s| s == signs[0]) {
                    // the origin must be strictly inside
                    let o = side([0, 0, 0]).signum();
                    if o == 0 || o != signs[0] {
                        return None;
                    }
                    tris.push(vec![i, j, k]);
                }
            }
        }
    }
    let used: std::collections::BTreeSet<usize> = tris.iter().flatten().copied().collect();
    (used.len() == n).then_some(tris)
}

fn sub(a: [i64; 3], b: [i64; 3]) -> [i64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot3(a: [i64; 3], b: [i64; 3]) -> i64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[test]
fn face_fans_of_polytopes_are_polytopal() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut tested = 0;
    while tested < 25 {
        let k = rng.random_range(4..=7);
        let pts: Vec<[i64; 3]> =
            (0..k).map(|_| [rng.random_range(-3..=3), rng.random_range(-3..=3), rng.random_range(-3..=3)]).collect();
        if pts.iter().any(|p| {
            let g = gcd(gcd(p[0] as i128, p[1] as i128), p[2] as i128);
            g != 1
        }) {
            continue;
        }
        let Some(tris) = brute_force_hull(&pts) else { continue };
        let rays: Vec<IntVector> = pts.iter().map(|p| int_vec(p)).collect();
        let Ok(fan) = Fan::new(3, rays, tris) else { continue };
        assert!(fan.validate().is_valid() && fan.is_complete());
        assert!(shephard_test(&fan).unwrap().is_strongly_polytopal);
        assert!(support_function_test(&fan).is_strongly_polytopal);
        tested += 1;
    }
}

#[test]
fn strict_feasibility_matches_box_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..200 {
        let rows = rng.random_range(1..=4);
        let g = random_matrix(&mut rng, rows, 2, 3);
        let found = (-30i64..=30).any(|x| (-30i64..=30).any(|y| g.iter().all(|r| r[0] * x + r[1] * y > 0)));
        let strict = to_int_matrix(&g, 2).to_rational();
        let eq = IntMatrix::zeros(0, 2).to_rational();
        let out = strict_lp_feasibility(&eq, &strict);
        assert_eq!(out.is_feasible(), found, "{g:?}");
        assert!(out.verify(&eq, &strict));
    }
}
