use alloc::vec;
use alloc::vec::Vec;

/// A solution `x` of `Σ j x_j = n`, with `z = Σ x_j` jumps in total.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OmegaTuple {
    pub x: Vec<u32>,
    pub z: u32,
}

/// All `(x_1, …, x_k) ≥ 0` with `Σ j x_j = n`, in decreasing lexicographic
/// order.
pub fn omega_set(k: usize, n: usize) -> Vec<OmegaTuple> {
    let mut out = Vec::new();
    if k == 0 {
        return out;
    }
    let mut x = vec![0u32; k];
    fill(0, n, &mut x, &mut out);
    out
}

fn fill(pos: usize, rest: usize, x: &mut Vec<u32>, out: &mut Vec<OmegaTuple>) {
    let size = pos + 1;
    if pos + 1 == x.len() {
        if rest.is_multiple_of(size) {
            x[pos] = (rest / size) as u32;
            out.push(OmegaTuple {
                x: x.clone(),
                z: x.iter().sum(),
            });
        }
        return;
    }
    for c in (0..=rest / size).rev() {
        x[pos] = c as u32;
        fill(pos + 1, rest - c * size, x, out);
    }
    x[pos] = 0;
}
