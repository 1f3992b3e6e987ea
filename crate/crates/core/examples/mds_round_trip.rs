//! Encodes a small matrix, lets three of six cs-matrices answer and decodes
//! `X·w` from them.

use std::collections::BTreeSet;

use hetcec::codec::{build_generator, encode, worker_compute, SubsetDecoder};
use hetcec::field::{FieldMatrix, DEFAULT_PRIME};

fn main() {
    let g = build_generator(6, 3, DEFAULT_PRIME).unwrap();
    let field = *g.field();
    let x = FieldMatrix::from_rows((0..6).map(|r| vec![r + 1, 2 * r, 7]).collect()).unwrap();
    let w = [1, 2, 3];
    let coded = encode(&x, &g).unwrap();

    let survivors: BTreeSet<usize> = [2, 4, 6].into();
    let decoder = SubsetDecoder::new(&g, &survivors).unwrap();
    let block = 2;
    let mut y = vec![0; 6];
    for j in 0..block {
        let column: Vec<u64> = survivors
            .iter()
            .map(|&i| worker_compute(&coded[i - 1], j..j + 1, &w, &field).unwrap()[0].value)
            .collect();
        for (ell, v) in decoder.decode(&column).unwrap().into_iter().enumerate() {
            y[ell * block + j] = v;
        }
    }
    println!("decoded  {y:?}");
    println!("direct   {:?}", x.mul_vec(&field, &w).unwrap());
}
