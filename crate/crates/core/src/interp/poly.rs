/// Exponent vectors of all monomials in `dim` variables with total degree
/// at most `degree`, ordered by total degree and then lexicographically
/// descending (`x`, `y` before `x^2`, `xy`, `y^2`).
pub fn monomial_exponents(dim: usize, degree: u32) -> Vec<Vec<u32>> {
    fn fill(rest: u32, prefix: &mut Vec<u32>, dim: usize, out: &mut Vec<Vec<u32>>) {
        if prefix.len() + 1 == dim {
            prefix.push(rest);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=rest).rev() {
            prefix.push(e);
            fill(rest - e, prefix, dim, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for total in 0..=degree {
        fill(total, &mut Vec::with_capacity(dim), dim, &mut out);
    }
    out
}

/// Monomials in the shifted and scaled variable `(x - center) / scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialBasis {
    pub degree: u32,
    pub center: Vec<f64>,
    pub scale: f64,
    exponents: Vec<Vec<u32>>,
}

impl MonomialBasis {
    pub fn new(degree: u32, center: Vec<f64>, scale: f64) -> Self {
        let exponents = monomial_exponents(center.len(), degree);
        Self {
            degree,
            center,
            scale,
            exponents,
        }
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponents(&self) -> &[Vec<u32>] {
        &self.exponents
    }

    /// Values of every basis monomial at `x`.
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let y: Vec<f64> = x
            .iter()
            .zip(&self.center)
            .map(|(v, c)| (v - c) / self.scale)
            .collect();
        self.exponents
            .iter()
            .map(|e| y.iter().zip(e).map(|(v, &p)| v.powi(p as i32)).product())
            .collect()
    }
}
