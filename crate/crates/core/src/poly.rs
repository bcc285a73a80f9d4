//! Dense real polynomials in the monomial basis.

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Poly {
    /// `coeffs[k]` multiplies `x^k`.
    pub coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: vec![0.0] }
    }

    pub fn constant(c: f64) -> Self {
        Poly { coeffs: vec![c] }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Horner evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new(
            (0..n)
                .map(|k| {
                    self.coeffs.get(k).copied().unwrap_or(0.0)
                        + other.coeffs.get(k).copied().unwrap_or(0.0)
                })
                .collect(),
        )
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Divides by `1 - x^2`, returning quotient and the remainder `r0 + r1 x`.
    pub fn div_one_minus_x2(&self) -> (Poly, [f64; 2]) {
        // p(x) = (1 - x^2) q(x) + r1 x + r0. Work from the top coefficient down:
        // coefficient of x^{k+2} in (1 - x^2) q is q_{k+2} - q_k.
        let n = self.coeffs.len();
        if n < 3 {
            let r0 = self.coeffs.first().copied().unwrap_or(0.0);
            let r1 = self.coeffs.get(1).copied().unwrap_or(0.0);
            return (Poly::zero(), [r0, r1]);
        }
        let mut q = vec![0.0; n - 2];
        for k in (0..n - 2).rev() {
            let above = q.get(k + 2).copied().unwrap_or(0.0);
            q[k] = above - self.coeffs[k + 2];
        }
        let r0 = self.coeffs[0] - q[0];
        let r1 = self.coeffs[1] - q.get(1).copied().unwrap_or(0.0);
        (Poly::new(q), [r0, r1])
    }

    /// Bound on `sup |p'|` over `[-1, 1]`.
    pub fn derivative_bound(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| k as f64 * c.abs())
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn division_by_one_minus_x2_is_exact() {
        // (1 - x^2)(2 + x + 3x^2) + 5x - 1
        let q = Poly::new(vec![2.0, 1.0, 3.0]);
        let p = Poly::new(vec![1.0, 0.0, -1.0])
            .mul(&q)
            .add(&Poly::new(vec![-1.0, 5.0]));
        let (qq, r) = p.div_one_minus_x2();
        assert_eq!(qq, q);
        assert_eq!(r, [-1.0, 5.0]);
    }

    #[test]
    fn derivative_and_eval() {
        let p = Poly::new(vec![1.0, -2.0, 0.0, 4.0]);
        assert_eq!(p.eval(2.0), 1.0 - 4.0 + 32.0);
        assert_eq!(p.derivative().coeffs, vec![-2.0, 0.0, 12.0]);
    }
}
