//! Generators on finite state spaces: the min/max Metropolis-Hastings
//! transforms, their mixtures, and the weighted L1 distance
//!
//! ```text
//! d_mu(A, B) = sum_{x != y} mu(x) |A(x, y) - B(x, y)|.
//! ```
//!
//! Every mixture `alpha M1 + (1 - alpha) M2` sits at the same distance from
//! `Q`, and no `mu`-reversible generator is closer.
//!
//! # Text format
//!
//! ```text
//! n
//! mu_1 ... mu_n
//! Q_11 ... Q_1n
//! ...
//! Q_n1 ... Q_nn
//! ```
//!
//! Whitespace-separated decimals; diagonal rate entries are ignored.

use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};

/// Dense `n x n` off-diagonal rate matrix; the diagonal is kept at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct RateMatrix {
    n: usize,
    data: Vec<f64>,
}

impl RateMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (x, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Parse(format!("row {x} has {} entries, expected {n}", row.len())));
            }
            for (y, &v) in row.iter().enumerate() {
                if x != y {
                    if !(v.is_finite() && v >= 0.0) {
                        return Err(Error::Parse(format!("rate ({x}, {y}) = {v} is not a finite non-negative number")));
                    }
                    m.set(x, y, v);
                }
            }
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[x * self.n + y]
    }

    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        if x != y {
            self.data[x * self.n + y] = v;
        }
    }

    pub fn row_sum(&self, x: usize) -> f64 {
        (0..self.n).filter(|&y| y != x).map(|y| self.get(x, y)).sum()
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = Self::zeros(self.n);
        for x in 0..self.n {
            for y in 0..self.n {
                out.set(x, y, f(self.get(x, y), other.get(x, y)));
            }
        }
        out
    }

    fn off_diagonal(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |x| (0..self.n).filter(move |&y| y != x).map(move |y| (x, y)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteChain {
    rates: RateMatrix,
    mu: Vec<f64>,
}

impl FiniteChain {
    pub fn new(rates: RateMatrix, mu: Vec<f64>) -> Result<Self> {
        if rates.n() != mu.len() {
            return Err(Error::config(format!(
                "rate matrix is {0}x{0} but mu has {1} entries",
                rates.n(),
                mu.len()
            )));
        }
        if rates.n() == 0 {
            return Err(Error::config("chain needs at least one state"));
        }
        if mu.iter().any(|&m| !(m.is_finite() && m > 0.0)) {
            return Err(Error::config("mu must be strictly positive"));
        }
        let total: f64 = mu.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::config(format!("mu sums to {total}, not 1")));
        }
        for (x, y) in rates.off_diagonal() {
            let v = rates.get(x, y);
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(format!("rate ({x}, {y}) = {v} must be finite and >= 0")));
            }
        }
        Ok(Self { rates, mu })
    }

    pub fn n(&self) -> usize {
        self.mu.len()
    }

    pub fn rates(&self) -> &RateMatrix {
        &self.rates
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    /// `mu(y) Q(y, x) / mu(x)`, the reversed proposal rate.
    fn reversed(&self, x: usize, y: usize) -> f64 {
        self.mu[y] * self.rates.get(y, x) / self.mu[x]
    }

    fn transform(&self, pick: impl Fn(f64, f64) -> f64) -> RateMatrix {
        let mut out = RateMatrix::zeros(self.n());
        for (x, y) in self.rates.off_diagonal() {
            out.set(x, y, pick(self.rates.get(x, y), self.reversed(x, y)));
        }
        out
    }

    /// Largest `|mu(x) A(x, y) - mu(y) A(y, x)|` over pairs.
    pub fn reversibility_defect(&self, a: &RateMatrix) -> f64 {
        a.off_diagonal()
            .map(|(x, y)| (self.mu[x] * a.get(x, y) - self.mu[y] * a.get(y, x)).abs())
            .fold(0.0, f64::max)
    }

    /// Parse the plain-text chain format from the module docs.
    pub fn parse(text: &str) -> Result<Self> {
        let mut tokens = text.split_whitespace();
        let mut next = |what: &str| -> Result<f64> {
            let tok = tokens
                .next()
                .ok_or_else(|| Error::Parse(format!("unexpected end of input reading {what}")))?;
            tok.parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number '{tok}' reading {what}")))
        };
        let n = next("state count")?;
        if !(n >= 1.0 && n.fract() == 0.0 && n < 1e6) {
            return Err(Error::Parse(format!("bad state count {n}")));
        }
        let n = n as usize;
        let mu = (0..n).map(|_| next("mu")).collect::<Result<Vec<_>>>()?;
        let rows = (0..n)
            .map(|x| (0..n).map(|_| next(&format!("rate row {x}"))).collect())
            .collect::<Result<Vec<Vec<f64>>>>()?;
        Self::new(RateMatrix::from_rows(&rows)?, mu)
    }

    pub fn to_text(&self) -> String {
        let n = self.n();
        let mut s = format!("{n}\n");
        let join = |v: Vec<f64>| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(" ");
        s.push_str(&join(self.mu.clone()));
        s.push('\n');
        for x in 0..n {
            s.push_str(&join((0..n).map(|y| self.rates.get(x, y)).collect()));
            s.push('\n');
        }
        s
    }
}

/// `M1(x, y) = min{Q(x, y), mu(y) Q(y, x) / mu(x)}`.
pub fn make_m1(chain: &FiniteChain) -> RateMatrix {
    chain.transform(f64::min)
}

/// `M2(x, y) = max{Q(x, y), mu(y) Q(y, x) / mu(x)}`.
pub fn make_m2(chain: &FiniteChain) -> RateMatrix {
    chain.transform(f64::max)
}

pub fn mix(m1: &RateMatrix, m2: &RateMatrix, alpha: f64) -> Result<RateMatrix> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::config(format!("mixture weight must lie in [0, 1], got {alpha}")));
    }
    if m1.n() != m2.n() {
        return Err(Error::usage("mixing matrices of different sizes"));
    }
    Ok(m1.zip_with(m2, |a, b| alpha * a + (1.0 - alpha) * b))
}

pub fn d_mu(chain: &FiniteChain, a: &RateMatrix, b: &RateMatrix) -> Result<f64> {
    if a.n() != chain.n() || b.n() != chain.n() {
        return Err(Error::usage("matrix size does not match the chain"));
    }
    Ok(a.off_diagonal()
        .map(|(x, y)| chain.mu[x] * (a.get(x, y) - b.get(x, y)).abs())
        .sum())
}

/// Mass of the flux imbalance `|mu(y) Q(y, x) - mu(x) Q(x, y)|` over the
/// half spaces `H< = {mu(y) Q(y, x) < mu(x) Q(x, y)}` and
/// `H> = {mu(y) Q(y, x) > mu(x) Q(x, y)}`.
pub fn half_space_masses(chain: &FiniteChain) -> (f64, f64) {
    let q = chain.rates();
    let mut below = 0.0;
    let mut above = 0.0;
    for (x, y) in q.off_diagonal() {
        let back = chain.mu[y] * q.get(y, x);
        let fwd = chain.mu[x] * q.get(x, y);
        if back < fwd {
            below += fwd - back;
        } else if back > fwd {
            above += back - fwd;
        }
    }
    (below, above)
}

/// A random `mu`-reversible generator `R(x, y) = S(x, y) / mu(x)` with
/// symmetric `S`.
///
/// Each `S(x, y)` is uniform on `[0, 2 max(mu(x) Q(x, y), mu(y) Q(y, x))]`,
/// which keeps draws at the scale of the chain's own flows where the
/// distance comparison is informative.
pub fn random_reversible<R: Rng + ?Sized>(chain: &FiniteChain, rng: &mut R) -> RateMatrix {
    let n = chain.n();
    let q = chain.rates();
    let mut out = RateMatrix::zeros(n);
    for x in 0..n {
        for y in (x + 1)..n {
            let scale = 2.0 * (chain.mu[x] * q.get(x, y)).max(chain.mu[y] * q.get(y, x));
            let s = scale * rng.random::<f64>();
            out.set(x, y, s / chain.mu[x]);
            out.set(y, x, s / chain.mu[y]);
        }
    }
    out
}

/// Shift the symmetric flow `mu(x) R(x, y) = mu(y) R(y, x)` of the pair
/// `{x, y}` by `delta`, clamped at zero. The result stays `mu`-reversible.
pub fn perturb_pair(chain: &FiniteChain, r: &RateMatrix, x: usize, y: usize, delta: f64) -> RateMatrix {
    let mu = chain.mu();
    let flow = (mu[x] * r.get(x, y) + mu[y] * r.get(y, x)) / 2.0;
    let s = (flow + delta).max(0.0);
    let mut out = r.clone();
    out.set(x, y, s / mu[x]);
    out.set(y, x, s / mu[y]);
    out
}

/// Random chain: off-diagonal rates iid uniform on `(0, 1]`, scaled so the
/// largest row sum is at most one; `mu` from a symmetric Dirichlet(1).
pub fn random_chain<R: Rng + ?Sized>(n: usize, rng: &mut R) -> FiniteChain {
    let mut q = RateMatrix::zeros(n);
    for x in 0..n {
        for y in 0..n {
            if x != y {
                q.set(x, y, 1.0 - rng.random::<f64>());
            }
        }
    }
    let max_row = (0..n).map(|x| q.row_sum(x)).fold(0.0, f64::max);
    if max_row > 1.0 {
        for x in 0..n {
            for y in 0..n {
                let v = q.get(x, y) / max_row;
                q.set(x, y, v);
            }
        }
    }
    let raw: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = raw.iter().sum();
    let mut mu: Vec<f64> = raw.iter().map(|v| v / total).collect();
    // Push the rounding residue into the largest entry so mu sums to one.
    let resid = 1.0 - mu.iter().sum::<f64>();
    let imax = (0..n).max_by(|&a, &b| mu[a].total_cmp(&mu[b])).unwrap_or(0);
    mu[imax] += resid;
    FiniteChain::new(q, mu).expect("random chain is valid by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_state() -> FiniteChain {
        let q = RateMatrix::from_rows(&[vec![0.0, 2.0], vec![1.0, 0.0]]).unwrap();
        FiniteChain::new(q, vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn two_state_transforms() {
        let c = two_state();
        let m1 = make_m1(&c);
        let m2 = make_m2(&c);
        assert_eq!((m1.get(0, 1), m1.get(1, 0)), (1.0, 1.0));
        assert_eq!((m2.get(0, 1), m2.get(1, 0)), (2.0, 2.0));
        let half = mix(&m1, &m2, 0.5).unwrap();
        assert_eq!((half.get(0, 1), half.get(1, 0)), (1.5, 1.5));
        assert_eq!(mix(&m1, &m2, 1.0).unwrap(), m1);
        assert_eq!(mix(&m1, &m2, 0.0).unwrap(), m2);
        assert!(mix(&m1, &m2, 1.2).is_err());
        assert_eq!(d_mu(&c, c.rates(), &m1).unwrap(), 0.5);
        assert_eq!(d_mu(&c, c.rates(), c.rates()).unwrap(), 0.0);
        assert_eq!(half_space_masses(&c), (0.5, 0.5));
    }

    #[test]
    fn reversible_proposal_is_fixed() {
        // mu(x) Q(x, y) symmetric
        let mu = vec![0.2, 0.3, 0.5];
        let s = [[0.0, 0.06, 0.1], [0.06, 0.0, 0.15], [0.1, 0.15, 0.0]];
        let rows: Vec<Vec<f64>> = (0..3).map(|x| (0..3).map(|y| s[x][y] / mu[x]).collect()).collect();
        let c = FiniteChain::new(RateMatrix::from_rows(&rows).unwrap(), mu).unwrap();
        let m1 = make_m1(&c);
        let m2 = make_m2(&c);
        for x in 0..3 {
            for y in 0..3 {
                assert!((m1.get(x, y) - c.rates().get(x, y)).abs() < 1e-15);
                assert!((m2.get(x, y) - c.rates().get(x, y)).abs() < 1e-15);
            }
        }
        let (a, b) = half_space_masses(&c);
        assert!(a < 1e-15 && b < 1e-15);
    }

    #[test]
    fn zero_rate_entries() {
        let q = RateMatrix::from_rows(&[vec![0.0, 0.0], vec![0.6, 0.0]]).unwrap();
        let c = FiniteChain::new(q, vec![0.25, 0.75]).unwrap();
        let m1 = make_m1(&c);
        let m2 = make_m2(&c);
        assert_eq!(m1.get(0, 1), 0.0);
        assert_eq!(m1.get(1, 0), 0.0);
        assert!((m2.get(0, 1) - 0.75 * 0.6 / 0.25).abs() < 1e-15);
        assert_eq!(m2.get(1, 0), 0.6);
        assert!(c.reversibility_defect(&m2) < 1e-15);
        let dq1 = d_mu(&c, c.rates(), &m1).unwrap();
        let dq2 = d_mu(&c, c.rates(), &m2).unwrap();
        assert!((dq1 - dq2).abs() < 1e-15);
    }

    #[test]
    fn degenerate_reversible_draw() {
        let q = RateMatrix::zeros(2);
        let c = FiniteChain::new(q, vec![0.5, 0.5]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = random_reversible(&c, &mut rng);
        assert_eq!(r, RateMatrix::zeros(2));
        assert_eq!(c.reversibility_defect(&r), 0.0);
    }

    #[test]
    fn random_chain_contract() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let c = random_chain(5, &mut rng);
            assert!((c.mu().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            assert!(c.mu().iter().all(|&m| m > 0.0));
            assert!((0..5).all(|x| c.rates().row_sum(x) <= 1.0 + 1e-12));
            for x in 0..5 {
                for y in 0..5 {
                    if x != y {
                        assert!(c.rates().get(x, y) > 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn text_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c = random_chain(4, &mut rng);
        let back = FiniteChain::parse(&c.to_text()).unwrap();
        assert_eq!(back, c);
        assert!(FiniteChain::parse("2\n0.5 0.5\n0 1\n").is_err());
        assert!(FiniteChain::parse("2\n0.5 0.6\n0 1\n1 0\n").is_err());
        assert!(FiniteChain::parse("2\n0.5 0.5\n0 -1\n1 0\n").is_err());
    }

    #[test]
    fn metric_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let c = random_chain(5, &mut rng);
            let a = random_reversible(&c, &mut rng);
            let b = random_reversible(&c, &mut rng);
            let q = c.rates();
            let ab = d_mu(&c, &a, &b).unwrap();
            assert_eq!(ab, d_mu(&c, &b, &a).unwrap());
            assert!(ab >= 0.0);
            assert!(d_mu(&c, q, &b).unwrap() <= d_mu(&c, q, &a).unwrap() + ab + 1e-15);
            let m1 = make_m1(&c);
            let m2 = make_m2(&c);
            for (x, y) in q.off_diagonal() {
                assert!(m1.get(x, y) <= q.get(x, y) && q.get(x, y) <= m2.get(x, y));
            }
        }
    }
}
