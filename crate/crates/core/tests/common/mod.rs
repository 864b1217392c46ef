//! Direct second-quantized construction on occupation-number states, used
//! as an independent oracle for the two-boson Hamiltonian.

use std::collections::HashMap;

use pairquench::hubbard::{Boundary, ModelParams};

pub type Occupation = Vec<u32>;

/// All occupations of `sites` modes with exactly two bosons.
pub fn fock_states(sites: usize) -> Vec<Occupation> {
    let mut out = Vec::new();
    for a in 0..sites {
        for b in a..sites {
            let mut n = vec![0; sites];
            n[a] += 1;
            n[b] += 1;
            out.push(n);
        }
    }
    out
}

/// `a_to^† a_from` on an occupation state.
fn hop(n: &Occupation, from: usize, to: usize) -> Option<(Occupation, f64)> {
    if n[from] == 0 {
        return None;
    }
    let mut m = n.clone();
    let mut amp = (m[from] as f64).sqrt();
    m[from] -= 1;
    amp *= ((m[to] + 1) as f64).sqrt();
    m[to] += 1;
    Some((m, amp))
}

pub fn fock_hamiltonian(p: &ModelParams) -> (Vec<Occupation>, Vec<Vec<f64>>) {
    let states = fock_states(p.sites);
    let index: HashMap<Occupation, usize> = states
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, s)| (s, i))
        .collect();
    let dim = states.len();
    let mut h = vec![vec![0.0; dim]; dim];
    let mut bonds: Vec<(usize, usize)> = (0..p.sites - 1).map(|s| (s, s + 1)).collect();
    if p.boundary == Boundary::Ring {
        bonds.push((p.sites - 1, 0));
    }
    for (col, n) in states.iter().enumerate() {
        for &(s, t) in &bonds {
            for (from, to) in [(s, t), (t, s)] {
                if let Some((m, amp)) = hop(n, from, to) {
                    h[index[&m]][col] -= p.hopping * amp;
                }
            }
            h[col][col] += p.nearest * (n[s] * n[t]) as f64;
        }
        for (site, &occ) in n.iter().enumerate() {
            let occ = occ as f64;
            h[col][col] += 0.5 * p.onsite * occ * (occ - 1.0);
            h[col][col] += p.field * (site + 1) as f64 * occ;
        }
    }
    (states, h)
}

pub fn pair_of(n: &Occupation) -> (usize, usize) {
    let sites: Vec<usize> = n
        .iter()
        .enumerate()
        .flat_map(|(s, &k)| std::iter::repeat_n(s + 1, k as usize))
        .collect();
    (sites[0], sites[1])
}

/// Largest entry-wise difference between `build_hamiltonian` and the
/// occupation-number construction.
pub fn max_deviation(p: &ModelParams) -> f64 {
    let basis = pairquench::hubbard::TwoBosonBasis::new(p.sites).unwrap();
    let h = pairquench::hubbard::build_hamiltonian(p, &basis).unwrap();
    let (states, reference) = fock_hamiltonian(p);
    assert_eq!(states.len(), basis.dim());
    let mut worst: f64 = 0.0;
    for (a, na) in states.iter().enumerate() {
        let (i, j) = pair_of(na);
        let ra = basis.rank(i, j).unwrap();
        for (b, nb) in states.iter().enumerate() {
            let (k, l) = pair_of(nb);
            let rb = basis.rank(k, l).unwrap();
            worst = worst.max((h.get(ra, rb) - reference[a][b]).abs());
        }
    }
    worst
}
