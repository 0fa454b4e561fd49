//! Simplex projection, lattice grids and random points on products of simplices.

use rand::Rng;

/// Euclidean projection onto the probability simplex, in place.
pub fn project_simplex(v: &mut [f64]) {
    let n = v.len();
    if n == 1 {
        v[0] = 1.0;
        return;
    }
    let mut u: Vec<f64> = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut css = 0.0;
    let mut theta = 0.0;
    for (k, &x) in u.iter().enumerate() {
        css += x;
        let t = (css - 1.0) / (k as f64 + 1.0);
        if x - t > 0.0 {
            theta = t;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
    let s: f64 = v.iter().sum();
    if s > 0.0 {
        for x in v.iter_mut() {
            *x /= s;
        }
    } else {
        v.iter_mut().for_each(|x| *x = 1.0 / n as f64);
    }
}

/// Number of lattice points `k/m` on the simplex with `n` vertices.
pub fn lattice_size(n: usize, m: usize) -> u128 {
    // C(m + n - 1, n - 1)
    let (top, k) = ((m + n - 1) as u128, (n - 1) as u128);
    let mut r: u128 = 1;
    for j in 0..k {
        r = r.saturating_mul(top - j) / (j + 1);
    }
    r
}

/// All lattice points `k/m` of the simplex with `n` vertices, in lexicographic
/// order of the count vectors (descending first coordinate).
pub fn lattice_points(n: usize, m: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let mut counts = vec![0usize; n];
    fn rec(pos: usize, left: usize, m: usize, counts: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        let n = counts.len();
        if pos == n - 1 {
            counts[pos] = left;
            out.push(counts.iter().map(|&c| c as f64 / m as f64).collect());
            return;
        }
        for c in (0..=left).rev() {
            counts[pos] = c;
            rec(pos + 1, left - c, m, counts, out);
        }
    }
    rec(0, m, m, &mut counts, &mut out);
    out
}

/// The finest resolution `m ≤ max_m` whose product lattice over `dims` has at
/// most `cap` points, with the product size; `None` when even `m = 1` is too big.
pub fn fit_resolution(dims: &[usize], max_m: usize, cap: u128) -> Option<(usize, u128)> {
    let size = |m: usize| {
        dims.iter()
            .fold(1u128, |acc, &n| acc.saturating_mul(lattice_size(n, m)))
    };
    let mut m = max_m.max(1);
    loop {
        let s = size(m);
        if s <= cap {
            return Some((m, s));
        }
        if m == 1 {
            return None;
        }
        m = if m > 8 { m * 3 / 4 } else { m - 1 };
    }
}

/// Uniformly random point of the simplex with `n` vertices.
pub fn random_point<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

/// Iterates the mixed-radix product of per-coordinate option counts.
pub struct Odometer {
    radices: Vec<usize>,
    digits: Vec<usize>,
    done: bool,
}

impl Odometer {
    pub fn new(radices: Vec<usize>) -> Self {
        let done = radices.contains(&0);
        Odometer {
            digits: vec![0; radices.len()],
            radices,
            done,
        }
    }

    pub fn total(radices: &[usize]) -> u128 {
        radices.iter().fold(1u128, |a, &r| a.saturating_mul(r as u128))
    }
}

impl Iterator for Odometer {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.digits.clone();
        let mut k = self.digits.len();
        loop {
            if k == 0 {
                self.done = true;
                break;
            }
            k -= 1;
            self.digits[k] += 1;
            if self.digits[k] < self.radices[k] {
                break;
            }
            self.digits[k] = 0;
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lattice_counts() {
        assert_eq!(lattice_size(2, 64), 65);
        assert_eq!(lattice_size(3, 2), 6);
        assert_eq!(lattice_points(3, 2).len(), 6);
        assert_eq!(lattice_points(2, 4)[0], vec![1.0, 0.0]);
    }

    #[test]
    fn resolution_shrinks_to_fit() {
        let (m, s) = fit_resolution(&[2, 2, 2], 64, 300_000).unwrap();
        assert_eq!(m, 64);
        assert_eq!(s, 65 * 65 * 65);
        let (m, s) = fit_resolution(&[2; 4], 64, 100_000).unwrap();
        assert!(m < 64 && s <= 100_000);
        assert!(fit_resolution(&[2; 40], 64, 1000).is_none());
    }

    #[test]
    fn odometer_covers_product() {
        let all: Vec<_> = Odometer::new(vec![2, 3]).collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], vec![0, 0]);
        assert_eq!(all[5], vec![1, 2]);
        assert_eq!(Odometer::new(vec![]).count(), 1);
    }

    proptest! {
        #[test]
        fn projection_lands_on_simplex(v in proptest::collection::vec(-5.0f64..5.0, 1..6)) {
            let mut w = v.clone();
            project_simplex(&mut w);
            prop_assert!(w.iter().all(|&x| x >= 0.0));
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }

        #[test]
        fn projection_fixes_simplex_points(raw in proptest::collection::vec(0.01f64..1.0, 2..6)) {
            let s: f64 = raw.iter().sum();
            let p: Vec<f64> = raw.iter().map(|x| x / s).collect();
            let mut q = p.clone();
            project_simplex(&mut q);
            for (a, b) in p.iter().zip(&q) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }
    }
}
