//! Seeded generators of complete simplicial fans.
//!
//! Every returned fan has passed [`Fan::validate`], is complete and simplicial.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::cone::Cone;
use crate::fan::Fan;
use crate::linalg::{determinant, gcd_of, int_vec, IntMatrix, IntVector};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RandomFanError {
    #[error(
        "complete simplicial fans in rank {n} with {d} rays are not covered: need d = n + 1, or d = n + 2 with n >= 2"
    )]
    Unsupported { n: usize, d: usize },
    #[error("no valid fan after {0} attempts")]
    Exhausted(usize),
}

const MAX_ATTEMPTS: usize = 10_000;

/// Product of random elementary integer operations; determinant ±1.
pub fn random_unimodular<R: Rng>(n: usize, rng: &mut R) -> IntMatrix {
    let mut m = IntMatrix::identity(n);
    if n == 0 {
        return m;
    }
    for _ in 0..3 * n {
        let i = rng.random_range(0..n);
        if n > 1 {
            let j = (i + rng.random_range(1..n)) % n;
            let c = BigInt::from(rng.random_range(-2i64..=2));
            for col in 0..n {
                let v = &m[(i, col)] + &c * &m[(j, col)];
                m.row_mut(i)[col] = v;
            }
        }
        if rng.random_bool(0.3) {
            for x in m.row_mut(i) {
                *x = -x.clone();
            }
        }
    }
    m
}

fn random_vector<R: Rng>(n: usize, bound: i64, rng: &mut R) -> IntVector {
    (0..n).map(|_| BigInt::from(rng.random_range(-bound..=bound))).collect()
}

/// Applies a random unimodular map and shuffles rays and cones.
fn scramble<R: Rng>(n: usize, rays: Vec<IntVector>, cones: Vec<Vec<usize>>, rng: &mut R) -> Option<Fan> {
    let a = random_unimodular(n, rng);
    let mut perm: Vec<usize> = (0..rays.len()).collect();
    perm.shuffle(rng);
    let mut new_rays = vec![Vec::new(); rays.len()];
    for (old, &new) in perm.iter().enumerate() {
        new_rays[new] = a.mul_vec(&rays[old]);
    }
    let mut new_cones: Vec<Vec<usize>> = cones.iter().map(|c| c.iter().map(|&i| perm[i]).collect()).collect();
    new_cones.shuffle(rng);
    Fan::new(n, new_rays, new_cones).ok()
}

fn accept(f: &Fan) -> bool {
    f.is_simplicial() && f.validate().is_valid() && f.is_complete()
}

/// Complete simplicial fan with `d = n + 1` or `d = n + 2` rays, in the normal form
/// `e_1, ..., e_n, u` or `e_1, ..., e_n, u, v`, moved by a random unimodular map.
pub fn kleinschmidt_fan<R: Rng>(n: usize, d: usize, rng: &mut R) -> Result<Fan, RandomFanError> {
    if n == 0 || !(d == n + 1 || (d == n + 2 && n >= 2)) {
        return Err(RandomFanError::Unsupported { n, d });
    }
    let bound = 3;
    for _ in 0..MAX_ATTEMPTS {
        let mut rays: Vec<IntVector> = (0..n).map(|i| unit(n, i)).collect();
        let cones: Vec<Vec<usize>>;
        if d == n + 1 {
            // u in the open negative orthant
            let u: IntVector = (0..n).map(|_| BigInt::from(-rng.random_range(1..=bound))).collect();
            rays.push(u);
            cones = (0..=n).map(|skip| (0..=n).filter(|&i| i != skip).collect()).collect();
        } else {
            let r = rng.random_range(1..n);
            let mut u = random_vector(n, bound, rng);
            let mut v = random_vector(n, bound, rng);
            for x in &mut u[..r] {
                *x = BigInt::from(-rng.random_range(1..=bound));
            }
            for x in &mut v[r..] {
                *x = BigInt::from(-rng.random_range(1..=bound));
            }
            rays.push(u);
            rays.push(v);
            let (iu, iv) = (n, n + 1);
            let first: Vec<usize> = (0..r).chain([iu]).collect();
            let second: Vec<usize> = (r..n).chain([iv]).collect();
            let mut cs = Vec::new();
            for &w in &first {
                for &z in &second {
                    cs.push((0..d).filter(|&i| i != w && i != z).collect());
                }
            }
            cones = cs;
        }
        if rays.iter().any(|r| !gcd_of(r).is_one()) {
            continue;
        }
        if let Some(f) = scramble(n, rays, cones, rng) {
            if accept(&f) {
                return Ok(f);
            }
        }
    }
    Err(RandomFanError::Exhausted(MAX_ATTEMPTS))
}

fn unit(n: usize, i: usize) -> IntVector {
    let mut v = vec![BigInt::zero(); n];
    v[i] = BigInt::one();
    v
}

/// Complete simplicial fan in `Z^3` with between 4 and `max_rays` rays: the face fan
/// of a random simplicial polytope containing the origin, followed by random edge flips.
/// Flips can leave the class of polytopal fans.
pub fn random_fan_3d<R: Rng>(max_rays: usize, rng: &mut R) -> Result<Fan, RandomFanError> {
    let max_rays = max_rays.max(4);
    for _ in 0..MAX_ATTEMPTS {
        let k = rng.random_range(4..=max_rays);
        let mut pts: Vec<IntVector> = Vec::new();
        while pts.len() < k {
            let p = random_vector(3, 3, rng);
            if !gcd_of(&p).is_one() || pts.contains(&p) {
                continue;
            }
            pts.push(p);
        }
        let Some(mut cones) = hull_triangles(&pts) else { continue };
        let flips = rng.random_range(0..=4 * k);
        for _ in 0..flips {
            flip_random_edge(&pts, &mut cones, rng);
        }
        if let Some(f) = scramble(3, pts, cones, rng) {
            if accept(&f) {
                return Ok(f);
            }
        }
    }
    Err(RandomFanError::Exhausted(MAX_ATTEMPTS))
}

/// Facets of `conv(pts)` as index triples, if the origin is interior, every point is a
/// vertex and every facet is a triangle.
fn hull_triangles(pts: &[IntVector]) -> Option<Vec<Vec<usize>>> {
    let lifted: Vec<IntVector> = pts
        .iter()
        .map(|p| {
            let mut q = p.clone();
            q.push(BigInt::one());
            q
        })
        .collect();
    let cone = Cone::new(4, lifted.clone());
    if cone.generators().len() != pts.len() || !cone.is_full_dimensional() {
        return None;
    }
    let mut tris = Vec::new();
    for h in cone.facets() {
        if h[3] <= BigInt::zero() {
            return None;
        }
        let tight: Vec<usize> = (0..pts.len()).filter(|&i| crate::linalg::dot(h, &lifted[i]).is_zero()).collect();
        if tight.len() != 3 {
            return None;
        }
        tris.push(tight);
    }
    if lifted.iter().any(|g| !cone.has_extremal_ray(g)) {
        return None;
    }
    Some(tris)
}

fn det3(a: &IntVector, b: &IntVector, c: &IntVector) -> BigInt {
    determinant(&IntMatrix::from_rows(3, &[a.clone(), b.clone(), c.clone()]))
}

/// Replaces triangles `abc`, `abd` by `acd`, `bcd` when this keeps a fan.
fn flip_random_edge<R: Rng>(pts: &[IntVector], tris: &mut [Vec<usize>], rng: &mut R) {
    let t = tris.len();
    let i = rng.random_range(0..t);
    let e = rng.random_range(0..3);
    let a = tris[i][e];
    let b = tris[i][(e + 1) % 3];
    let c = tris[i][(e + 2) % 3];
    let Some(j) = (0..t).find(|&j| j != i && tris[j].contains(&a) && tris[j].contains(&b)) else { return };
    let d = *tris[j].iter().find(|&&x| x != a && x != b).expect("triangle has a third vertex");
    if tris.iter().any(|tr| tr.contains(&c) && tr.contains(&d)) {
        return;
    }
    let sa = det3(&pts[a], &pts[c], &pts[d]);
    let sb = det3(&pts[b], &pts[c], &pts[d]);
    if sa.is_zero() || sb.is_zero() || (sa > BigInt::zero()) == (sb > BigInt::zero()) {
        return;
    }
    let mut t1 = vec![a, c, d];
    let mut t2 = vec![b, c, d];
    t1.sort_unstable();
    t2.sort_unstable();
    tris[i] = t1;
    tris[j] = t2;
}

/// `count` Kleinschmidt fans; fan `i` uses its own stream derived from `seed`.
pub fn kleinschmidt_batch(n: usize, d: usize, count: usize, seed: u64) -> Result<Vec<Fan>, RandomFanError> {
    (0..count).into_par_iter().map(|i| kleinschmidt_fan(n, d, &mut stream(seed, i))).collect()
}

/// `count` fans from [`random_fan_3d`]; fan `i` uses its own stream derived from `seed`.
pub fn random_fan_3d_batch(max_rays: usize, count: usize, seed: u64) -> Result<Vec<Fan>, RandomFanError> {
    (0..count).into_par_iter().map(|i| random_fan_3d(max_rays, &mut stream(seed, i))).collect()
}

fn stream(seed: u64, i: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    rng
}

/// The fan of `P^n` in the normal form used by the generators, unscrambled.
pub fn projective_space(n: usize) -> Fan {
    let mut rays: Vec<IntVector> = (0..n).map(|i| unit(n, i)).collect();
    rays.push(int_vec(&vec![-1; n]));
    let cones = (0..=n).map(|skip| (0..=n).filter(|&i| i != skip).collect()).collect();
    Fan::new(n, rays, cones).expect("projective space fan")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unimodular_has_unit_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..5 {
            let d = determinant(&random_unimodular(n, &mut rng));
            assert!(d == BigInt::one() || d == -BigInt::one());
        }
    }

    #[test]
    fn p1_is_the_only_rank_one_case() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = kleinschmidt_fan(1, 2, &mut rng).unwrap();
        assert!(f.equivalent(&projective_space(1)));
        assert!(kleinschmidt_fan(1, 3, &mut rng).is_err());
    }

    #[test]
    fn batches_are_deterministic() {
        let a = kleinschmidt_batch(2, 4, 5, 3).unwrap();
        let b = kleinschmidt_batch(2, 4, 5, 3).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.to_json(), y.to_json());
            assert_eq!(x.ray_count(), 4);
        }
    }

    #[test]
    fn three_dimensional_fans_are_complete() {
        let fans = random_fan_3d_batch(8, 5, 11).unwrap();
        for f in fans {
            assert!(f.ray_count() >= 4 && f.ray_count() <= 8);
            assert!(accept(&f));
        }
    }
}
