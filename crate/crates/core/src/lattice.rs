//! Regular grids on probability simplices and their Cartesian powers.

/// Points of `{x ≥ 0, Σx = 1}` in `dim` coordinates with spacing `1/k`,
/// in lexicographic order of the integer compositions (first coordinate
/// largest first).
pub fn simplex_points(dim: usize, k: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    if dim == 0 {
        return out;
    }
    let mut parts = vec![0usize; dim];
    compose(k, 0, &mut parts, &mut |p| {
        out.push(p.iter().map(|&c| c as f64 / k.max(1) as f64).collect());
    });
    out
}

/// Points of `{x ≥ 0, Σx ≤ 1}` with spacing `1/k`.
pub fn subsimplex_points(dim: usize, k: usize) -> Vec<Vec<f64>> {
    simplex_points(dim + 1, k)
        .into_iter()
        .map(|mut p| {
            p.pop();
            p
        })
        .collect()
}

fn compose(remaining: usize, pos: usize, parts: &mut [usize], visit: &mut dyn FnMut(&[usize])) {
    if pos + 1 == parts.len() {
        parts[pos] = remaining;
        visit(parts);
        return;
    }
    for c in (0..=remaining).rev() {
        parts[pos] = c;
        compose(remaining - c, pos + 1, parts, visit);
    }
}

/// Number of lattice points on the `dim`-coordinate simplex at spacing `1/k`.
pub fn simplex_point_count(dim: usize, k: usize) -> u128 {
    if dim == 0 {
        return 0;
    }
    binomial((k + dim - 1) as u128, (dim - 1) as u128)
}

pub fn binomial(n: u128, r: u128) -> u128 {
    let r = r.min(n.saturating_sub(r));
    (0..r).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// `base^exp`, saturating.
pub fn power(base: u128, exp: usize) -> u128 {
    (0..exp).fold(1u128, |acc, _| acc.saturating_mul(base))
}

/// Calls `visit` with every index tuple in `0..radix` of length `len`,
/// last position varying fastest.
pub fn for_each_tuple(radix: usize, len: usize, mut visit: impl FnMut(&[usize])) {
    if radix == 0 && len > 0 {
        return;
    }
    let mut idx = vec![0usize; len];
    loop {
        visit(&idx);
        let mut pos = len;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < radix {
                break;
            }
            idx[pos] = 0;
        }
    }
}
