//! Text forms of kernels and measures, e.g. `gaussian(sigma=1.0,d=1)`,
//! `sum(gaussian(1),cosine(2))`, `perturbed(uniform(-1,1),alpha=0.5,nu=2)`,
//! `discrete[(0,0.5),(2,0.5)]`.

use crate::error::{Error, Result};
use crate::kernels::{KernelFamily, KernelSpec, TorusFamily, TorusKernelSpec};
use crate::measures::{Analytic1D, Discrete, Measure, TorusDensity};
use crate::scalar::{cst, Real};

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Word(String),
    Call { name: String, args: Vec<Arg> },
    List(Vec<Node>),
    Tuple(Vec<Node>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Arg {
    pub key: Option<String>,
    pub value: Node,
}

struct Lexer<'a> {
    s: &'a [u8],
    pos: usize,
}

fn perr<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse(msg.into()))
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_') {
            self.pos += 1;
        }
        if self.pos > start && !self.s[start].is_ascii_digit() {
            Some(String::from_utf8_lossy(&self.s[start..self.pos]).into_owned())
        } else {
            self.pos = start;
            None
        }
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() {
            let c = self.s[self.pos];
            let exp_sign = (c == b'-' || c == b'+') && self.pos > start && matches!(self.s[self.pos - 1], b'e' | b'E');
            if c.is_ascii_digit()
                || c == b'.'
                || c == b'e'
                || c == b'E'
                || ((c == b'-' || c == b'+') && self.pos == start)
                || exp_sign
            {
                self.pos += 1;
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.s[start..self.pos]).unwrap_or("");
        // `/` for rationals such as 1/8
        let mut v: f64 = text
            .parse()
            .map_err(|_| Error::Parse(format!("bad number '{text}' at offset {start}")))?;
        if self.peek() == Some(b'/') {
            self.pos += 1;
            v /= self.number()?;
        }
        Ok(v)
    }

    fn node(&mut self) -> Result<Node> {
        match self.peek() {
            None => perr("unexpected end of input"),
            Some(b'[') => {
                self.pos += 1;
                Ok(Node::List(self.items(b']')?))
            }
            Some(b'(') => {
                self.pos += 1;
                Ok(Node::Tuple(self.items(b')')?))
            }
            Some(c) if c.is_ascii_digit() || c == b'-' || c == b'+' || c == b'.' => Ok(Node::Num(self.number()?)),
            Some(_) => {
                let name = self
                    .ident()
                    .ok_or_else(|| Error::Parse(format!("unexpected character at offset {}", self.pos)))?;
                match name.as_str() {
                    "pi" => return Ok(Node::Num(std::f64::consts::PI)),
                    "inf" => return Ok(Node::Num(f64::INFINITY)),
                    _ => {}
                }
                match self.peek() {
                    Some(b'(') => {
                        self.pos += 1;
                        let args = self.args()?;
                        Ok(Node::Call { name, args })
                    }
                    Some(b'[') => {
                        self.pos += 1;
                        let items = self.items(b']')?;
                        Ok(Node::Call {
                            name,
                            args: vec![Arg {
                                key: None,
                                value: Node::List(items),
                            }],
                        })
                    }
                    _ => Ok(Node::Word(name)),
                }
            }
        }
    }

    fn items(&mut self, close: u8) -> Result<Vec<Node>> {
        let mut out = Vec::new();
        if self.peek() == Some(close) {
            self.pos += 1;
            return Ok(out);
        }
        loop {
            out.push(self.node()?);
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(c) if c == close => {
                    self.pos += 1;
                    return Ok(out);
                }
                _ => return perr(format!("expected ',' or '{}' at offset {}", close as char, self.pos)),
            }
        }
    }

    fn args(&mut self) -> Result<Vec<Arg>> {
        let mut out = Vec::new();
        if self.peek() == Some(b')') {
            self.pos += 1;
            return Ok(out);
        }
        loop {
            let save = self.pos;
            let key = match self.ident() {
                Some(k) if self.peek() == Some(b'=') => {
                    self.pos += 1;
                    Some(k)
                }
                _ => {
                    self.pos = save;
                    None
                }
            };
            out.push(Arg {
                key,
                value: self.node()?,
            });
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(b')') => {
                    self.pos += 1;
                    return Ok(out);
                }
                _ => return perr(format!("expected ',' or ')' at offset {}", self.pos)),
            }
        }
    }
}

/// Parses a complete expression.
pub fn parse_node(text: &str) -> Result<Node> {
    let mut lx = Lexer {
        s: text.as_bytes(),
        pos: 0,
    };
    let n = lx.node()?;
    if lx.peek().is_some() {
        return perr(format!("trailing input at offset {}", lx.pos));
    }
    Ok(n)
}

/// Positional and keyword arguments of a call.
struct Args<'a> {
    name: &'a str,
    args: &'a [Arg],
    used: Vec<bool>,
}

impl<'a> Args<'a> {
    fn new(name: &'a str, args: &'a [Arg]) -> Self {
        Args {
            name,
            args,
            used: vec![false; args.len()],
        }
    }

    /// Argument by keyword, else the `pos`-th positional argument.
    fn get(&mut self, keys: &[&str], pos: usize) -> Option<&'a Node> {
        for (i, a) in self.args.iter().enumerate() {
            if let Some(k) = &a.key {
                if keys.contains(&k.as_str()) {
                    self.used[i] = true;
                    return Some(&a.value);
                }
            }
        }
        let mut seen = 0;
        for (i, a) in self.args.iter().enumerate() {
            if a.key.is_none() {
                if seen == pos {
                    self.used[i] = true;
                    return Some(&a.value);
                }
                seen += 1;
            }
        }
        None
    }

    fn num(&mut self, keys: &[&str], pos: usize) -> Result<Option<f64>> {
        match self.get(keys, pos) {
            None => Ok(None),
            Some(Node::Num(v)) => Ok(Some(*v)),
            Some(other) => perr(format!(
                "{}: expected a number for {}, got {other:?}",
                self.name, keys[0]
            )),
        }
    }

    fn req(&mut self, keys: &[&str], pos: usize) -> Result<f64> {
        self.num(keys, pos)?
            .ok_or_else(|| Error::Parse(format!("{}: missing parameter {}", self.name, keys[0])))
    }

    fn uint(&mut self, keys: &[&str], pos: usize) -> Result<Option<u32>> {
        match self.num(keys, pos)? {
            None => Ok(None),
            Some(v) if v >= 0.0 && v.fract() == 0.0 && v < 1e9 => Ok(Some(v as u32)),
            Some(v) => perr(format!(
                "{}: {} must be a nonnegative integer, got {v}",
                self.name, keys[0]
            )),
        }
    }

    fn word(&mut self, keys: &[&str]) -> Option<String> {
        for (i, a) in self.args.iter().enumerate() {
            if let (Some(k), Node::Word(w)) = (&a.key, &a.value) {
                if keys.contains(&k.as_str()) {
                    self.used[i] = true;
                    return Some(w.clone());
                }
            }
        }
        None
    }

    fn finish(&self) -> Result<()> {
        if let Some(i) = self.used.iter().position(|u| !u) {
            let a = &self.args[i];
            return perr(format!(
                "{}: unexpected argument {}",
                self.name,
                a.key.clone().unwrap_or_else(|| format!("#{i}"))
            ));
        }
        Ok(())
    }
}

pub fn parse_kernel<T: Real>(text: &str) -> Result<KernelSpec<T>> {
    kernel_from_node(&parse_node(text)?)
}

fn kernel_from_node<T: Real>(node: &Node) -> Result<KernelSpec<T>> {
    let (name, args) = match node {
        Node::Call { name, args } => (name.as_str(), args.as_slice()),
        Node::Word(w) => (w.as_str(), &[][..]),
        _ => return perr(format!("expected a kernel, got {node:?}")),
    };
    let mut a = Args::new(name, args);
    let c = |v: f64| cst::<T>(v);
    let dim = a.uint(&["d", "dim"], usize::MAX)?.unwrap_or(1) as usize;
    let domain = a.word(&["domain"]);
    let on_torus = match domain.as_deref() {
        None | Some("real") | Some("R") => false,
        Some("torus") | Some("T") => true,
        Some(other) => return perr(format!("unknown domain '{other}'")),
    };
    let periodic = |a: &mut Args, fam: TorusFamily<T>, default_period: f64| -> Result<KernelSpec<T>> {
        let t = TorusKernelSpec::new(fam, dim)?;
        if on_torus {
            Ok(KernelSpec::torus(t))
        } else {
            let period = a.num(&["period", "tau"], usize::MAX)?.unwrap_or(default_period);
            KernelSpec::new(
                KernelFamily::Periodic {
                    torus: t,
                    period: c(period),
                },
                dim,
            )
        }
    };
    let tau = std::f64::consts::TAU;
    let fam = match name {
        "trivial" | "constant" => KernelFamily::Trivial {
            c: c(a.num(&["c", "value"], 0)?.unwrap_or(1.0)),
        },
        "dot" | "linear" | "dot_product" => KernelFamily::DotProduct,
        "poly2" => KernelFamily::Poly2,
        "gaussian" | "rbf" => KernelFamily::Gaussian {
            sigma: c(a.req(&["sigma"], 0)?),
        },
        "laplacian" => KernelFamily::Laplacian {
            sigma: c(a.req(&["sigma"], 0)?),
        },
        "imq" | "inverse_multiquadric" => KernelFamily::InverseMultiquadric {
            sigma: c(a.req(&["sigma"], 0)?),
            c: c(a.num(&["c"], 1)?.unwrap_or(0.5)),
        },
        "matern" => KernelFamily::Matern {
            nu: c(a.req(&["nu"], 0)?),
            sigma: c(a.num(&["sigma"], 1)?.unwrap_or(1.0)),
        },
        "bspline" | "b_spline" => {
            let order = if let Some(n) = a.uint(&["n"], usize::MAX)? {
                2 * n + 1
            } else {
                a.uint(&["order"], 0)?.unwrap_or(1)
            };
            if order % 2 == 0 {
                return perr("bspline order must be odd (2n+1)");
            }
            KernelFamily::BSpline { n: (order - 1) / 2 }
        }
        "sinc" => KernelFamily::Sinc {
            sigma: c(a.req(&["sigma"], 0)?),
        },
        "expdot" | "exp_dot" => KernelFamily::ExpDot {
            sigma: c(a.req(&["sigma"], 0)?),
            radius: a.num(&["radius", "r"], 1)?.map(c),
        },
        "poisson" => {
            let sigma = c(a.req(&["sigma"], 0)?);
            let k = periodic(&mut a, TorusFamily::Poisson { sigma }, tau)?;
            return finish(a, k);
        }
        "dirichlet" | "fejer" => {
            let n = a
                .uint(&["n", "l"], 0)?
                .ok_or_else(|| Error::Parse(format!("{name}: missing parameter n")))?;
            let fam = if name == "dirichlet" {
                TorusFamily::Dirichlet { n }
            } else {
                TorusFamily::Fejer { n }
            };
            let k = periodic(&mut a, fam, tau)?;
            return finish(a, k);
        }
        "cosine" | "cos" => {
            let k = if on_torus {
                let freq = a.uint(&["freq", "m"], 0)?.unwrap_or(1);
                KernelSpec::torus(TorusKernelSpec::new(TorusFamily::Cosine { freq }, dim)?)
            } else {
                let sigma = a.req(&["sigma"], 0)?;
                KernelSpec::cosine(c(sigma))?.with_dim(dim)?
            };
            return finish(a, k);
        }
        "coefficients" => {
            let vals = match a.get(&["values"], 0) {
                Some(Node::List(items)) => items
                    .iter()
                    .map(|n| match n {
                        Node::Num(v) => Ok(c(*v)),
                        _ => perr("coefficients must be numbers"),
                    })
                    .collect::<Result<Vec<T>>>()?,
                _ => return perr("coefficients needs values=[...]"),
            };
            let k = periodic(&mut a, TorusFamily::Explicit { coeffs: vals }, tau)?;
            return finish(a, k);
        }
        "sum" | "product" => {
            let k1 = a
                .get(&[], 0)
                .ok_or_else(|| Error::Parse(format!("{name} needs two kernels")))?;
            let k2 = a
                .get(&[], 1)
                .ok_or_else(|| Error::Parse(format!("{name} needs two kernels")))?;
            let (k1, k2) = (kernel_from_node::<T>(k1)?, kernel_from_node::<T>(k2)?);
            let k = if name == "sum" {
                KernelSpec::sum(k1, k2)?
            } else {
                KernelSpec::product(k1, k2)?
            };
            return finish(a, k);
        }
        "scaled" => {
            let factor = a.req(&["c"], 0)?;
            let inner = a
                .get(&[], 1)
                .ok_or_else(|| Error::Parse("scaled needs a kernel".into()))?;
            let k = kernel_from_node::<T>(inner)?.scaled(c(factor))?;
            return finish(a, k);
        }
        other => return perr(format!("unknown kernel '{other}'")),
    };
    a.finish()?;
    KernelSpec::new(fam, dim)
}

fn finish<T>(a: Args, k: T) -> Result<T> {
    a.finish()?;
    Ok(k)
}

pub fn parse_measure<T: Real>(text: &str) -> Result<Measure<T>> {
    measure_from_node(&parse_node(text)?)
}

fn point_from_node<T: Real>(n: &Node) -> Result<Vec<T>> {
    match n {
        Node::Num(v) => Ok(vec![cst(*v)]),
        Node::List(items) | Node::Tuple(items) => items
            .iter()
            .map(|x| match x {
                Node::Num(v) => Ok(cst(*v)),
                _ => perr("point coordinates must be numbers"),
            })
            .collect(),
        _ => perr("bad atom location"),
    }
}

fn analytic_from_node<T: Real>(node: &Node) -> Result<Analytic1D<T>> {
    match measure_from_node::<T>(node)? {
        Measure::Analytic(a) => Ok(a),
        other => perr(format!("expected an analytic density, got {other}")),
    }
}

fn measure_from_node<T: Real>(node: &Node) -> Result<Measure<T>> {
    let (name, args) = match node {
        Node::Call { name, args } => (name.as_str(), args.as_slice()),
        _ => return perr(format!("expected a measure, got {node:?}")),
    };
    let mut a = Args::new(name, args);
    let c = |v: f64| cst::<T>(v);
    let m = match name {
        "gaussian" | "normal" => {
            let mu = a.num(&["mu", "mean"], 0)?.unwrap_or(0.0);
            let s = match (a.num(&["sd", "s", "std"], usize::MAX)?, a.num(&["var", "variance"], 1)?) {
                (Some(s), None) => s,
                (None, Some(v)) if v > 0.0 => v.sqrt(),
                (None, None) => 1.0,
                _ => return perr("gaussian takes either sd or a positive variance"),
            };
            Measure::gaussian(c(mu), c(s))?
        }
        "cauchy" => Measure::cauchy(
            c(a.num(&["x0", "loc"], 0)?.unwrap_or(0.0)),
            c(a.num(&["gamma", "scale"], 1)?.unwrap_or(1.0)),
        )?,
        "uniform" => Measure::uniform(c(a.req(&["a", "lo"], 0)?), c(a.req(&["b", "hi"], 1)?))?,
        "cauchy_power" => {
            let l = a
                .uint(&["l"], 0)?
                .ok_or_else(|| Error::Parse("cauchy_power needs l".into()))?;
            Measure::Analytic(Analytic1D::cauchy_power(l)?)
        }
        "perturbed" => {
            let base = a
                .get(&["base"], 0)
                .ok_or_else(|| Error::Parse("perturbed needs a base density".into()))?;
            let base = analytic_from_node::<T>(base)?;
            let alpha = a.req(&["alpha"], 1)?;
            let nu = a.req(&["nu"], 2)?;
            Measure::Analytic(Analytic1D::sinusoid_perturbed(base, c(alpha), c(nu))?)
        }
        "dirac" | "delta" => {
            let x = a
                .get(&["x"], 0)
                .ok_or_else(|| Error::Parse("dirac needs a location".into()))?;
            Measure::Discrete(Discrete::dirac(point_from_node(x)?))
        }
        "discrete" => {
            let items = match a.get(&["atoms"], 0) {
                Some(Node::List(items)) => items,
                _ => return perr("discrete needs a list of (point, weight) atoms"),
            };
            let mut atoms = Vec::with_capacity(items.len());
            for it in items {
                match it {
                    Node::Tuple(pair) if pair.len() == 2 => {
                        let w = match &pair[1] {
                            Node::Num(w) => c(*w),
                            _ => return perr("atom weight must be a number"),
                        };
                        atoms.push((point_from_node(&pair[0])?, w));
                    }
                    _ => return perr("atoms are written (point, weight)"),
                }
            }
            Measure::Discrete(Discrete::new(atoms)?)
        }
        "torus_uniform" => Measure::Torus(TorusDensity::Uniform {
            dim: a.uint(&["d", "dim"], 0)?.unwrap_or(1) as usize,
        }),
        "torus_flat" => {
            let dim = a.uint(&["d", "dim"], usize::MAX)?.unwrap_or(1) as usize;
            let n0 = match a.get(&["n0"], usize::MAX) {
                Some(Node::List(v)) => v
                    .iter()
                    .map(|n| match n {
                        Node::Num(x) if x.fract() == 0.0 => Ok(*x as i64),
                        _ => perr("n0 entries must be integers"),
                    })
                    .collect::<Result<Vec<i64>>>()?,
                Some(Node::Num(x)) if x.fract() == 0.0 => vec![*x as i64],
                _ => return perr("torus_flat needs n0"),
            };
            let alpha = a.req(&["alpha"], usize::MAX)?;
            let t = TorusDensity::FlatSinusoid {
                dim,
                n0,
                alpha: c(alpha),
            };
            t.validate()?;
            Measure::Torus(t)
        }
        other => return perr(format!("unknown measure '{other}'")),
    };
    a.finish()?;
    Ok(m)
}
