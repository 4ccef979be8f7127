//! Order-3 jets: value plus all partial derivatives through third order of
//! a scalar field on the 4-dimensional chart.
//!
//! Mixed partials are stored once per multiset of indices (10 second-order,
//! 20 third-order slots), so symmetry holds by construction.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::expr::{check_pow_domain, integer_exponent, BinaryOp, ScalarExpr, UnaryOp};

/// Chart point `x0..x3`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Point(pub [f64; 4]);

impl Point {
    pub fn new(coords: [f64; 4]) -> Result<Self> {
        if coords.iter().all(|c| c.is_finite()) {
            Ok(Point(coords))
        } else {
            Err(Error::Domain(format!("non-finite point {coords:?}")))
        }
    }

    pub fn coords(&self) -> &[f64; 4] {
        &self.0
    }
}

const fn build_hess_index() -> [[usize; 4]; 4] {
    let mut table = [[0; 4]; 4];
    let mut n = 0;
    let mut i = 0;
    while i < 4 {
        let mut j = i;
        while j < 4 {
            table[i][j] = n;
            table[j][i] = n;
            n += 1;
            j += 1;
        }
        i += 1;
    }
    table
}

const fn build_third_index() -> [[[usize; 4]; 4]; 4] {
    let mut table = [[[0; 4]; 4]; 4];
    let mut n = 0;
    let mut i = 0;
    while i < 4 {
        let mut j = i;
        while j < 4 {
            let mut k = j;
            while k < 4 {
                // all six orderings of (i, j, k) share one slot
                table[i][j][k] = n;
                table[i][k][j] = n;
                table[j][i][k] = n;
                table[j][k][i] = n;
                table[k][i][j] = n;
                table[k][j][i] = n;
                n += 1;
                k += 1;
            }
            j += 1;
        }
        i += 1;
    }
    table
}

const HESS_INDEX: [[usize; 4]; 4] = build_hess_index();
const THIRD_INDEX: [[[usize; 4]; 4]; 4] = build_third_index();

/// Canonical (sorted) index triples, in storage order.
const fn build_third_keys() -> [[usize; 3]; 20] {
    let mut keys = [[0; 3]; 20];
    let mut n = 0;
    let mut i = 0;
    while i < 4 {
        let mut j = i;
        while j < 4 {
            let mut k = j;
            while k < 4 {
                keys[n] = [i, j, k];
                n += 1;
                k += 1;
            }
            j += 1;
        }
        i += 1;
    }
    keys
}

const HESS_KEYS: [[usize; 2]; 10] = [
    [0, 0],
    [0, 1],
    [0, 2],
    [0, 3],
    [1, 1],
    [1, 2],
    [1, 3],
    [2, 2],
    [2, 3],
    [3, 3],
];
const THIRD_KEYS: [[usize; 3]; 20] = build_third_keys();

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet3 {
    value: f64,
    grad: [f64; 4],
    hess: [f64; 10],
    third: [f64; 20],
}

impl Jet3 {
    pub fn constant(value: f64) -> Self {
        Jet3 {
            value,
            grad: [0.0; 4],
            hess: [0.0; 10],
            third: [0.0; 20],
        }
    }

    /// The coordinate function `x^i` at a point.
    pub fn variable(index: usize, at: f64) -> Self {
        let mut jet = Jet3::constant(at);
        jet.grad[index] = 1.0;
        jet
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn grad(&self) -> [f64; 4] {
        self.grad
    }

    pub fn d1(&self, i: usize) -> f64 {
        self.grad[i]
    }

    pub fn d2(&self, i: usize, j: usize) -> f64 {
        self.hess[HESS_INDEX[i][j]]
    }

    pub fn d3(&self, i: usize, j: usize, k: usize) -> f64 {
        self.third[THIRD_INDEX[i][j][k]]
    }

    pub fn hess(&self) -> [[f64; 4]; 4] {
        std::array::from_fn(|i| std::array::from_fn(|j| self.d2(i, j)))
    }

    pub fn third(&self) -> [[[f64; 4]; 4]; 4] {
        std::array::from_fn(|i| std::array::from_fn(|j| std::array::from_fn(|k| self.d3(i, j, k))))
    }

    pub fn scale(&self, a: f64) -> Self {
        Jet3 {
            value: a * self.value,
            grad: self.grad.map(|v| a * v),
            hess: self.hess.map(|v| a * v),
            third: self.third.map(|v| a * v),
        }
    }

    /// `phi(self)` given `phi` and its first three derivatives at `self.value`.
    pub fn compose(&self, d0: f64, d1: f64, d2: f64, d3: f64) -> Self {
        let g = &self.grad;
        let grad = g.map(|gi| d1 * gi);
        let hess = std::array::from_fn(|n| {
            let [i, j] = HESS_KEYS[n];
            d2 * g[i] * g[j] + d1 * self.hess[n]
        });
        let third = std::array::from_fn(|n| {
            let [i, j, k] = THIRD_KEYS[n];
            d3 * g[i] * g[j] * g[k]
                + d2 * (self.d2(i, j) * g[k] + self.d2(i, k) * g[j] + self.d2(j, k) * g[i])
                + d1 * self.third[n]
        });
        Jet3 {
            value: d0,
            grad,
            hess,
            third,
        }
    }

    pub fn recip(&self) -> Result<Self> {
        let x = self.value;
        if x == 0.0 {
            return Err(Error::Domain("division by zero".into()));
        }
        let r = 1.0 / x;
        Ok(self.compose(r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r))
    }

    pub fn powf(&self, c: f64) -> Result<Self> {
        let x = self.value;
        check_pow_domain(x, c)?;
        let pw = |e: f64| -> f64 {
            match integer_exponent(e) {
                Some(n) => x.powi(n),
                None => x.powf(e),
            }
        };
        // c(c-1)... vanish exactly where the falling factorial hits zero, so
        // integer powers of a zero base stay finite.
        let d1 = if c == 0.0 { 0.0 } else { c * pw(c - 1.0) };
        let d2 = if c == 0.0 || c == 1.0 {
            0.0
        } else {
            c * (c - 1.0) * pw(c - 2.0)
        };
        let d3 = if c == 0.0 || c == 1.0 || c == 2.0 {
            0.0
        } else {
            c * (c - 1.0) * (c - 2.0) * pw(c - 3.0)
        };
        Ok(self.compose(pw(c), d1, d2, d3))
    }

    pub fn exp(&self) -> Self {
        let e = self.value.exp();
        self.compose(e, e, e, e)
    }

    pub fn ln(&self) -> Result<Self> {
        let x = self.value;
        if x <= 0.0 {
            return Err(Error::Domain(format!("ln of non-positive value {x}")));
        }
        let r = 1.0 / x;
        Ok(self.compose(x.ln(), r, -r * r, 2.0 * r * r * r))
    }

    pub fn sqrt(&self) -> Result<Self> {
        let x = self.value;
        if x <= 0.0 {
            return Err(Error::Domain(format!("sqrt of non-positive value {x}")));
        }
        let s = x.sqrt();
        Ok(self.compose(s, 0.5 / s, -0.25 / (s * x), 0.375 / (s * x * x)))
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.compose(s, c, -s, -c)
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.compose(c, -s, -c, s)
    }

    pub fn sinh(&self) -> Self {
        let (s, c) = (self.value.sinh(), self.value.cosh());
        self.compose(s, c, s, c)
    }

    pub fn cosh(&self) -> Self {
        let (s, c) = (self.value.sinh(), self.value.cosh());
        self.compose(c, s, c, s)
    }

    pub fn checked_div(&self, rhs: &Jet3) -> Result<Self> {
        Ok(*self * rhs.recip()?)
    }
}

impl Add for Jet3 {
    type Output = Jet3;

    fn add(self, rhs: Jet3) -> Jet3 {
        Jet3 {
            value: self.value + rhs.value,
            grad: std::array::from_fn(|i| self.grad[i] + rhs.grad[i]),
            hess: std::array::from_fn(|i| self.hess[i] + rhs.hess[i]),
            third: std::array::from_fn(|i| self.third[i] + rhs.third[i]),
        }
    }
}

impl Sub for Jet3 {
    type Output = Jet3;

    fn sub(self, rhs: Jet3) -> Jet3 {
        Jet3 {
            value: self.value - rhs.value,
            grad: std::array::from_fn(|i| self.grad[i] - rhs.grad[i]),
            hess: std::array::from_fn(|i| self.hess[i] - rhs.hess[i]),
            third: std::array::from_fn(|i| self.third[i] - rhs.third[i]),
        }
    }
}

impl Neg for Jet3 {
    type Output = Jet3;

    fn neg(self) -> Jet3 {
        Jet3 {
            value: -self.value,
            grad: self.grad.map(|v| -v),
            hess: self.hess.map(|v| -v),
            third: self.third.map(|v| -v),
        }
    }
}

/// Leibniz rule truncated at order 3.
impl Mul for Jet3 {
    type Output = Jet3;

    fn mul(self, rhs: Jet3) -> Jet3 {
        let (f, g) = (&self, &rhs);
        let grad = std::array::from_fn(|i| f.grad[i] * g.value + f.value * g.grad[i]);
        let hess = std::array::from_fn(|n| {
            let [i, j] = HESS_KEYS[n];
            f.hess[n] * g.value
                + f.grad[i] * g.grad[j]
                + f.grad[j] * g.grad[i]
                + f.value * g.hess[n]
        });
        let third = std::array::from_fn(|n| {
            let [i, j, k] = THIRD_KEYS[n];
            f.third[n] * g.value
                + f.d2(i, j) * g.grad[k]
                + f.d2(i, k) * g.grad[j]
                + f.d2(j, k) * g.grad[i]
                + f.grad[i] * g.d2(j, k)
                + f.grad[j] * g.d2(i, k)
                + f.grad[k] * g.d2(i, j)
                + f.value * g.third[n]
        });
        Jet3 {
            value: f.value * g.value,
            grad,
            hess,
            third,
        }
    }
}

/// Value and exact partial derivatives through order 3 of `expr` at `p`.
pub fn eval_jet3(expr: &ScalarExpr, p: &Point) -> Result<Jet3> {
    Ok(match expr {
        ScalarExpr::Const(c) => Jet3::constant(*c),
        ScalarExpr::Coord(i) => Jet3::variable(*i, p.0[*i]),
        ScalarExpr::Unary(op, a) => {
            let a = eval_jet3(a, p)?;
            match op {
                UnaryOp::Neg => -a,
                UnaryOp::Exp => a.exp(),
                UnaryOp::Ln => a.ln()?,
                UnaryOp::Sin => a.sin(),
                UnaryOp::Cos => a.cos(),
                UnaryOp::Sinh => a.sinh(),
                UnaryOp::Cosh => a.cosh(),
                UnaryOp::Sqrt => a.sqrt()?,
            }
        }
        ScalarExpr::Binary(op, a, b) => {
            let a = eval_jet3(a, p)?;
            let b = eval_jet3(b, p)?;
            match op {
                BinaryOp::Add => a + b,
                BinaryOp::Sub => a - b,
                BinaryOp::Mul => a * b,
                BinaryOp::Div => a.checked_div(&b)?,
            }
        }
        ScalarExpr::Pow(a, c) => eval_jet3(a, p)?.powf(*c)?,
    })
}
