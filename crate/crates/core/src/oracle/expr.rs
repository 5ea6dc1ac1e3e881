//! A small expression engine over `(t, x^1, x^2, x^3)` with exact derivatives.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::physics::{Jet1, Jet2};

#[derive(Debug, PartialEq)]
enum Node {
    Const(f64),
    /// 0 is `t`, 1..=3 are `x^1..x^3`.
    Var(usize),
    Add(Expr, Expr),
    Mul(Expr, Expr),
    Pow(Expr, i32),
    Exp(Expr),
    Sin(Expr),
    Cos(Expr),
}

/// An analytic field: constants, variables, `+`, `*`, integer powers, `exp`, `sin`, `cos`.
#[derive(Clone, Debug, PartialEq)]
pub struct Expr(Arc<Node>);

impl Expr {
    fn node(n: Node) -> Self {
        Expr(Arc::new(n))
    }

    pub fn constant(c: f64) -> Self {
        Self::node(Node::Const(c))
    }

    pub fn var(i: usize) -> Self {
        assert!(i <= 3, "variables are t, x1, x2, x3");
        Self::node(Node::Var(i))
    }

    pub fn t() -> Self {
        Self::var(0)
    }

    /// `x^a`, a in 1..=3.
    pub fn x(a: usize) -> Self {
        assert!((1..=3).contains(&a));
        Self::var(a)
    }

    /// `r^2 = |x|^2`.
    pub fn r2() -> Self {
        Self::x(1).powi(2) + Self::x(2).powi(2) + Self::x(3).powi(2)
    }

    fn as_const(&self) -> Option<f64> {
        match *self.0 {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn powi(&self, k: i32) -> Self {
        match (k, self.as_const()) {
            (0, _) => Self::constant(1.0),
            (1, _) => self.clone(),
            (_, Some(c)) => Self::constant(c.powi(k)),
            _ => Self::node(Node::Pow(self.clone(), k)),
        }
    }

    pub fn exp(&self) -> Self {
        Self::node(Node::Exp(self.clone()))
    }

    pub fn sin(&self) -> Self {
        Self::node(Node::Sin(self.clone()))
    }

    pub fn cos(&self) -> Self {
        Self::node(Node::Cos(self.clone()))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::constant(c) * self.clone()
    }

    /// Exact partial derivative in variable `var` (0 is `t`).
    pub fn derivative(&self, var: usize) -> Self {
        match &*self.0 {
            Node::Const(_) => Self::constant(0.0),
            Node::Var(i) => Self::constant(if *i == var { 1.0 } else { 0.0 }),
            Node::Add(a, b) => a.derivative(var) + b.derivative(var),
            Node::Mul(a, b) => a.derivative(var) * b.clone() + a.clone() * b.derivative(var),
            Node::Pow(a, k) => a.powi(k - 1).scale(*k as f64) * a.derivative(var),
            Node::Exp(a) => self.clone() * a.derivative(var),
            Node::Sin(a) => a.cos() * a.derivative(var),
            Node::Cos(a) => -(a.sin() * a.derivative(var)),
        }
    }

    pub fn eval(&self, p: &[f64; 4]) -> f64 {
        match &*self.0 {
            Node::Const(c) => *c,
            Node::Var(i) => p[*i],
            Node::Add(a, b) => a.eval(p) + b.eval(p),
            Node::Mul(a, b) => a.eval(p) * b.eval(p),
            Node::Pow(a, k) => a.eval(p).powi(*k),
            Node::Exp(a) => a.eval(p).exp(),
            Node::Sin(a) => a.eval(p).sin(),
            Node::Cos(a) => a.eval(p).cos(),
        }
    }

    /// `L_a f = x^a d_t f + t d_a f`.
    pub fn boost(&self, a: usize) -> Self {
        Self::x(a) * self.derivative(0) + Self::t() * self.derivative(a)
    }

    /// `L_0 f = t d_t f + x^a d_a f`.
    pub fn scaling(&self) -> Self {
        let mut out = Self::t() * self.derivative(0);
        for a in 1..=3 {
            out = out + Self::x(a) * self.derivative(a);
        }
        out
    }

    /// `Omega_ab f = x^a d_b f - x^b d_a f`.
    pub fn rotation(&self, a: usize, b: usize) -> Self {
        Self::x(a) * self.derivative(b) - Self::x(b) * self.derivative(a)
    }

    /// `box f = -d_t^2 f + Laplacian f`.
    pub fn wave_box(&self) -> Self {
        let mut out = -self.derivative(0).derivative(0);
        for a in 1..=3 {
            out = out + self.derivative(a).derivative(a);
        }
        out
    }

    /// `d_gamma f d^gamma g` with `eta = diag(-1, 1, 1, 1)`.
    pub fn null_form(&self, g: &Expr) -> Self {
        let mut out = -(self.derivative(0) * g.derivative(0));
        for a in 1..=3 {
            out = out + self.derivative(a) * g.derivative(a);
        }
        out
    }

    pub fn jet1(&self, p: &[f64; 4]) -> Jet1 {
        Jet1::new(
            self.eval(p),
            std::array::from_fn(|a| self.derivative(a).eval(p)),
        )
    }

    pub fn jet2(&self, p: &[f64; 4]) -> Jet2 {
        let d: [Expr; 4] = std::array::from_fn(|a| self.derivative(a));
        Jet2 {
            value: self.eval(p),
            d: std::array::from_fn(|a| d[a].eval(p)),
            dd: std::array::from_fn(|a| std::array::from_fn(|b| d[a].derivative(b).eval(p))),
        }
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a + b),
            (Some(0.0), _) => rhs,
            (_, Some(0.0)) => self,
            _ => Expr::node(Node::Add(self, rhs)),
        }
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a * b),
            (Some(z), _) | (_, Some(z)) if z == 0.0 => Expr::constant(0.0),
            (Some(1.0), _) => rhs,
            (_, Some(1.0)) => self,
            _ => Expr::node(Node::Mul(self, rhs)),
        }
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        match self.as_const() {
            Some(c) => Expr::constant(-c),
            None => Expr::constant(-1.0) * self,
        }
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        self + (-rhs)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const NAMES: [&str; 4] = ["t", "x1", "x2", "x3"];
        match &*self.0 {
            Node::Const(c) => write!(f, "{c}"),
            Node::Var(i) => write!(f, "{}", NAMES[*i]),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Mul(a, b) => write!(f, "{a}*{b}"),
            Node::Pow(a, k) => write!(f, "{a}^{k}"),
            Node::Exp(a) => write!(f, "exp({a})"),
            Node::Sin(a) => write!(f, "sin({a})"),
            Node::Cos(a) => write!(f, "cos({a})"),
        }
    }
}
