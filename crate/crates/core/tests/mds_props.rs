mod common;

use std::collections::BTreeSet;

use hetcec::codec::{build_generator, encode, worker_compute, SubsetDecoder};
use hetcec::field::{FieldMatrix, PrimeField, DEFAULT_PRIME};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// All `k`-subsets of `1..=n` in lexicographic order.
fn subsets(n: usize, k: usize) -> Vec<BTreeSet<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<BTreeSet<usize>>) {
        if cur.len() == k {
            out.push(cur.iter().copied().collect());
            return;
        }
        for i in start..=n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(1, n, k, &mut Vec::new(), &mut out);
    out
}

/// `Π_{i<j} (x_j − x_i)` over the subset's evaluation points.
fn vandermonde_det(points: &[u64], f: &PrimeField) -> u64 {
    let mut det = 1;
    for j in 0..points.len() {
        for i in 0..j {
            det = f.mul(det, f.sub(points[j], points[i]));
        }
    }
    det
}

#[test]
fn every_submatrix_is_invertible() {
    for (z, l) in [(3, 3), (6, 3), (9, 6), (10, 5)] {
        let g = build_generator(z, l, DEFAULT_PRIME).unwrap();
        let f = *g.field();
        for s in subsets(z, l) {
            let sub = g.submatrix(&s).unwrap();
            let det = sub.determinant(&f).unwrap();
            let points: Vec<u64> = s.iter().map(|&i| g.eval_points()[i - 1]).collect();
            assert_eq!(det, vandermonde_det(&points, &f), "subset {s:?}");
            assert_ne!(det, 0);
        }
    }
}

#[test]
fn generator_is_deterministic() {
    assert_eq!(
        build_generator(9, 6, DEFAULT_PRIME).unwrap(),
        build_generator(9, 6, DEFAULT_PRIME).unwrap()
    );
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, p: u64) -> FieldMatrix {
    FieldMatrix::from_rows(
        (0..rows)
            .map(|_| common::random_field_vec(rng, cols, p))
            .collect(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn encoding_is_linear(seed in any::<u64>(), a in 0u64..DEFAULT_PRIME, b in 0u64..DEFAULT_PRIME) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = build_generator(6, 3, DEFAULT_PRIME).unwrap();
        let f = *g.field();
        let x = random_matrix(&mut rng, 12, 3, DEFAULT_PRIME);
        let y = random_matrix(&mut rng, 12, 3, DEFAULT_PRIME);
        let mut combo = FieldMatrix::zeros(12, 3);
        for r in 0..12 {
            for c in 0..3 {
                combo.set(r, c, f.add(f.mul(a, x.get(r, c)), f.mul(b, y.get(r, c))));
            }
        }
        let (ex, ey, ec) = (encode(&x, &g).unwrap(), encode(&y, &g).unwrap(), encode(&combo, &g).unwrap());
        for i in 0..6 {
            for r in 0..ec[i].rows.rows() {
                for c in 0..3 {
                    let want = f.add(f.mul(a, ex[i].rows.get(r, c)), f.mul(b, ey[i].rows.get(r, c)));
                    prop_assert_eq!(ec[i].rows.get(r, c), want);
                }
            }
        }
    }

    #[test]
    fn any_l_subset_decodes(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (z, l, rows, cols) = (9, 6, 12, 4);
        let g = build_generator(z, l, DEFAULT_PRIME).unwrap();
        let f = *g.field();
        let x = random_matrix(&mut rng, rows, cols, DEFAULT_PRIME);
        let w = common::random_field_vec(&mut rng, cols, DEFAULT_PRIME);
        let coded = encode(&x, &g).unwrap();
        let all = subsets(z, l);
        let set = &all[pick.index(all.len())];
        let decoder = SubsetDecoder::new(&g, set).unwrap();
        let per_cs: Vec<Vec<u64>> = decoder
            .subset()
            .iter()
            .map(|&i| worker_compute(&coded[i - 1], 0..rows / l, &w, &f).unwrap().into_iter().map(|r| r.value).collect())
            .collect();
        let direct = x.mul_vec(&f, &w).unwrap();
        for j in 0..rows / l {
            let column: Vec<u64> = per_cs.iter().map(|v| v[j]).collect();
            let blocks = decoder.decode(&column).unwrap();
            for (ell, v) in blocks.iter().enumerate() {
                prop_assert_eq!(*v, direct[ell * (rows / l) + j]);
            }
        }
    }
}
