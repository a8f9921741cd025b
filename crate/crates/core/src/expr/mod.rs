//! Analytic scalar fields over spacetime coordinates.
//!
//! Expressions are parsed from a small infix grammar (see [`parse`]) or built
//! programmatically with the arithmetic operators on [`Expr`]. Evaluation is
//! generic over [`Scalar`], so the same tree yields plain values, gradients
//! ([`Jet1`]) or exact Hessians ([`Jet2`]).
//!
//! The coordinate names `t`, `x`, `y`, `z` are the Cartesian coordinates;
//! `r` always denotes the derived radius `sqrt(x^2 + y^2 + z^2)`.

mod jet;
mod parse;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

pub use jet::{sym_index, Jet1, Jet2, Scalar, DIM};
pub use parse::parse;

use crate::error::{Error, Result};

/// Named parameter values.
pub type Params = BTreeMap<String, f64>;

/// Spacetime coordinate names, plus the derived radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Coord {
    T,
    X,
    Y,
    Z,
    R,
}

impl Coord {
    pub fn from_name(name: &str) -> Option<Coord> {
        Some(match name {
            "t" => Coord::T,
            "x" => Coord::X,
            "y" => Coord::Y,
            "z" => Coord::Z,
            "r" => Coord::R,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Coord::T => "t",
            Coord::X => "x",
            Coord::Y => "y",
            Coord::Z => "z",
            Coord::R => "r",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Sin,
    Cos,
    Exp,
    Log,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Param(String),
    Var(Coord),
    Neg(Expr),
    Binary(BinOp, Expr, Expr),
    /// Exponent is an integer or half-integer constant.
    Pow(Expr, f64),
    Call(Func, Expr),
}

/// Immutable expression tree; cloning shares structure.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr(Arc<Node>);

impl Expr {
    fn from_node(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn constant(v: f64) -> Self {
        Self::from_node(Node::Const(v))
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    pub fn var(c: Coord) -> Self {
        Self::from_node(Node::Var(c))
    }

    pub fn param(name: impl Into<String>) -> Self {
        Self::from_node(Node::Param(name.into()))
    }

    /// Cartesian position vector `(x, y, z)`.
    pub fn position() -> [Expr; 3] {
        [Expr::var(Coord::X), Expr::var(Coord::Y), Expr::var(Coord::Z)]
    }

    /// Integer or half-integer power.
    pub fn pow(&self, exponent: f64) -> Result<Self> {
        if !exponent.is_finite() || (2.0 * exponent).fract() != 0.0 {
            return Err(Error::Syntax {
                column: 0,
                message: format!("exponent {exponent} is not an integer or half-integer"),
            });
        }
        Ok(Self::from_node(Node::Pow(self.clone(), exponent)))
    }

    pub fn powi(&self, n: i32) -> Self {
        Self::from_node(Node::Pow(self.clone(), n as f64))
    }

    pub fn call(f: Func, arg: Expr) -> Self {
        Self::from_node(Node::Call(f, arg))
    }

    pub fn sqrt(&self) -> Self {
        Self::call(Func::Sqrt, self.clone())
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self.node() {
            Node::Const(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_constant() == Some(0.0)
    }

    /// Dot product of two 3-vectors of expressions, expanded into a sum.
    pub fn dot(a: &[Expr; 3], b: &[Expr; 3]) -> Expr {
        let terms: Vec<Expr> = (0..3)
            .filter(|&i| !a[i].is_zero() && !b[i].is_zero())
            .map(|i| &a[i] * &b[i])
            .collect();
        terms.into_iter().reduce(|s, t| s + t).unwrap_or_else(Expr::zero)
    }

    /// Cross product `a x b`, expanded componentwise.
    pub fn cross(a: &[Expr; 3], b: &[Expr; 3]) -> [Expr; 3] {
        let term = |i: usize, j: usize| -> Expr {
            // a_i b_j - a_j b_i with structural zeros dropped
            let p = if a[i].is_zero() || b[j].is_zero() {
                None
            } else {
                Some(&a[i] * &b[j])
            };
            let q = if a[j].is_zero() || b[i].is_zero() {
                None
            } else {
                Some(&a[j] * &b[i])
            };
            match (p, q) {
                (None, None) => Expr::zero(),
                (Some(p), None) => p,
                (None, Some(q)) => -q,
                (Some(p), Some(q)) => p - q,
            }
        };
        [term(1, 2), term(2, 0), term(0, 1)]
    }

    /// True if the coordinate appears in the tree. `r` counts as depending
    /// on `x`, `y` and `z`.
    pub fn depends_on(&self, c: Coord) -> bool {
        match self.node() {
            Node::Const(_) | Node::Param(_) => false,
            Node::Var(v) => {
                *v == c || (*v == Coord::R && matches!(c, Coord::X | Coord::Y | Coord::Z))
            }
            Node::Neg(e) | Node::Pow(e, _) | Node::Call(_, e) => e.depends_on(c),
            Node::Binary(_, a, b) => a.depends_on(c) || b.depends_on(c),
        }
    }

    /// Names of all parameters referenced by the tree.
    pub fn parameters(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_params(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_params(&self, out: &mut Vec<String>) {
        match self.node() {
            Node::Param(p) => out.push(p.clone()),
            Node::Const(_) | Node::Var(_) => {}
            Node::Neg(e) | Node::Pow(e, _) | Node::Call(_, e) => e.collect_params(out),
            Node::Binary(_, a, b) => {
                a.collect_params(out);
                b.collect_params(out);
            }
        }
    }

    /// Replaces every parameter that has a value in `params` by a constant.
    pub fn bind(&self, params: &Params) -> Expr {
        match self.node() {
            Node::Param(p) => match params.get(p) {
                Some(v) => Expr::constant(*v),
                None => self.clone(),
            },
            Node::Const(_) | Node::Var(_) => self.clone(),
            Node::Neg(e) => Self::from_node(Node::Neg(e.bind(params))),
            Node::Pow(e, n) => Self::from_node(Node::Pow(e.bind(params), *n)),
            Node::Call(f, e) => Self::from_node(Node::Call(*f, e.bind(params))),
            Node::Binary(op, a, b) => Self::from_node(Node::Binary(*op, a.bind(params), b.bind(params))),
        }
    }

    /// Evaluates the tree at `point = (t, x, y, z)`.
    pub fn eval<S: Scalar>(&self, point: &[f64; 4], params: &Params) -> Result<S> {
        let mut ctx = EvalCtx { point, params, radius: None };
        self.eval_in(&mut ctx)
    }

    /// Plain value.
    pub fn value(&self, point: &[f64; 4], params: &Params) -> Result<f64> {
        self.eval::<f64>(point, params)
    }

    /// Value, gradient and Hessian with respect to `(t, x, y, z)`.
    pub fn eval_jet2(&self, point: &[f64; 4], params: &Params) -> Result<Jet2> {
        self.eval::<Jet2>(point, params)
    }

    fn eval_in<S: Scalar>(&self, ctx: &mut EvalCtx<'_, S>) -> Result<S> {
        Ok(match self.node() {
            Node::Const(v) => S::constant(*v),
            Node::Param(p) => match ctx.params.get(p) {
                Some(v) => S::constant(*v),
                None => return Err(Error::UnboundParameter(p.clone())),
            },
            Node::Var(c) => ctx.coordinate(*c)?,
            Node::Neg(e) => -e.eval_in(ctx)?,
            Node::Binary(op, a, b) => {
                let a = a.eval_in(ctx)?;
                let b = b.eval_in(ctx)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b.value() == 0.0 {
                            return Err(Error::domain("division by zero"));
                        }
                        a / b
                    }
                }
            }
            Node::Pow(e, n) => {
                let base = e.eval_in(ctx)?;
                let b = base.value();
                if n.fract() == 0.0 {
                    let k = *n as i32;
                    if b == 0.0 && k < 0 {
                        return Err(Error::domain("negative power of zero"));
                    }
                    base.powi(k)
                } else {
                    if b <= 0.0 {
                        return Err(Error::domain(format!(
                            "half-integer power of non-positive value {b}"
                        )));
                    }
                    base.powf(*n)
                }
            }
            Node::Call(f, e) => {
                let a = e.eval_in(ctx)?;
                let v = a.value();
                match f {
                    Func::Sqrt => {
                        if v < 0.0 {
                            return Err(Error::domain(format!("sqrt of negative value {v}")));
                        }
                        if v == 0.0 {
                            return Err(Error::domain("sqrt at zero is not differentiable"));
                        }
                        a.sqrt()
                    }
                    Func::Log => {
                        if v <= 0.0 {
                            return Err(Error::domain(format!("log of non-positive value {v}")));
                        }
                        a.ln()
                    }
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                }
            }
        })
    }

    fn precedence(&self) -> u8 {
        match self.node() {
            Node::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            Node::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            Node::Neg(_) => 3,
            Node::Pow(..) => 4,
            _ => 5,
        }
    }
}

struct EvalCtx<'a, S> {
    point: &'a [f64; 4],
    params: &'a Params,
    radius: Option<S>,
}

impl<S: Scalar> EvalCtx<'_, S> {
    fn coordinate(&mut self, c: Coord) -> Result<S> {
        Ok(match c {
            Coord::T => S::coordinate(0, self.point[0]),
            Coord::X => S::coordinate(1, self.point[1]),
            Coord::Y => S::coordinate(2, self.point[2]),
            Coord::Z => S::coordinate(3, self.point[3]),
            Coord::R => {
                if let Some(r) = self.radius {
                    return Ok(r);
                }
                let x = S::coordinate(1, self.point[1]);
                let y = S::coordinate(2, self.point[2]);
                let z = S::coordinate(3, self.point[3]);
                let r2 = x * x + y * y + z * z;
                if r2.value() == 0.0 {
                    return Err(Error::domain("r is not differentiable at the origin"));
                }
                let r = r2.sqrt();
                self.radius = Some(r);
                r
            }
        })
    }
}

/// Canonical form: minimal parentheses, numbers in shortest round-trip form.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, e: &Expr, min: u8| -> fmt::Result {
            if e.precedence() < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self.node() {
            Node::Const(v) => {
                if *v < 0.0 {
                    write!(f, "(-{:?})", -v)
                } else {
                    write!(f, "{v:?}")
                }
            }
            Node::Param(p) => write!(f, "{p}"),
            Node::Var(c) => write!(f, "{}", c.name()),
            Node::Neg(e) => {
                write!(f, "-")?;
                wrap(f, e, 4)
            }
            Node::Binary(op, a, b) => {
                let (sym, p) = match op {
                    BinOp::Add => ("+", 1),
                    BinOp::Sub => ("-", 1),
                    BinOp::Mul => ("*", 2),
                    BinOp::Div => ("/", 2),
                };
                wrap(f, a, p)?;
                write!(f, " {sym} ")?;
                // right operand of a left-associative operator needs strictly higher precedence
                wrap(f, b, p + 1)
            }
            Node::Pow(e, n) => {
                wrap(f, e, 5)?;
                if *n < 0.0 {
                    write!(f, "^(-{:?})", -n)
                } else {
                    write!(f, "^{n:?}")
                }
            }
            Node::Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}

macro_rules! binary_impl {
    ($trait:ident, $method:ident, $op:expr) => {
        impl $trait for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::from_node(Node::Binary($op, self, rhs))
            }
        }
        impl $trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::from_node(Node::Binary($op, self.clone(), rhs.clone()))
            }
        }
        impl $trait<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::from_node(Node::Binary($op, self.clone(), rhs))
            }
        }
        impl $trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::from_node(Node::Binary($op, self, rhs.clone()))
            }
        }
        impl $trait<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                Expr::from_node(Node::Binary($op, self, Expr::constant(rhs)))
            }
        }
        impl $trait<Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::from_node(Node::Binary($op, Expr::constant(self), rhs))
            }
        }
    };
}

binary_impl!(Add, add, BinOp::Add);
binary_impl!(Sub, sub, BinOp::Sub);
binary_impl!(Mul, mul, BinOp::Mul);
binary_impl!(Div, div, BinOp::Div);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::from_node(Node::Neg(self))
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::from_node(Node::Neg(self.clone()))
    }
}
