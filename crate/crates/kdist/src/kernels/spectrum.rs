//! Bochner spectra of translation-invariant kernels.
//!
//! Convention: ψ(x) = (2π)^{-d/2} ∫ ψ̂(ω) e^{iωᵀx} dω, so the spectral measure
//! is dΛ = (2π)^{-d/2} ψ̂(ω) dω.  Atom weights in [`LatticeSpectrum`] are
//! stored in ψ̂ units (coefficients of Dirac deltas in ψ̂); [`LambdaComponent`]
//! works directly in Λ units.

use std::fmt;
use std::sync::Arc;

use crate::quadrature::Quad;
use crate::scalar::{cst, Real};

use super::torus::TorusKernelSpec;

pub type DensityFn<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;

/// (2π)^{-d/2}
pub fn fourier_norm<T: Real>(d: usize) -> T {
    (T::one() / T::TAU().sqrt()).powi(d as i32)
}

#[derive(Clone)]
pub struct SpectralDensity<T> {
    psi_hat: DensityFn<T>,
    pub dim: usize,
    /// Box containing the support, if compact.
    pub compact: Option<Vec<(T, T)>>,
    /// One-dimensional kinks or jumps of ψ̂ (support edges included).
    pub breakpoints: Vec<T>,
}

impl<T: Real> SpectralDensity<T> {
    pub fn new(dim: usize, psi_hat: DensityFn<T>) -> Self {
        SpectralDensity {
            psi_hat,
            dim,
            compact: None,
            breakpoints: Vec::new(),
        }
    }

    pub fn compact(mut self, bounds: Vec<(T, T)>) -> Self {
        if self.dim == 1 {
            self.breakpoints.push(bounds[0].0);
            self.breakpoints.push(bounds[0].1);
        }
        self.compact = Some(bounds);
        self
    }

    pub fn breakpoints(mut self, pts: Vec<T>) -> Self {
        self.breakpoints.extend(pts);
        self
    }

    /// ψ̂(ω) as printed in the kernel tables.
    pub fn eval(&self, omega: &[T]) -> T {
        (self.psi_hat)(omega)
    }

    /// Density of Λ: (2π)^{-d/2} ψ̂(ω).
    pub fn lambda(&self, omega: &[T]) -> T {
        fourier_norm::<T>(self.dim) * self.eval(omega)
    }
}

impl<T: fmt::Debug> fmt::Debug for SpectralDensity<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralDensity")
            .field("dim", &self.dim)
            .field("compact", &self.compact)
            .finish()
    }
}

#[derive(Debug, Clone)]
pub struct LatticeSpectrum<T> {
    /// (location, ψ̂ weight)
    pub atoms: Vec<(Vec<T>, T)>,
    /// Λ-mass of atoms not listed (truncated periodic spectra).
    pub tail: T,
    pub dim: usize,
    /// False when the listed atoms are a truncation of an infinite set.
    pub complete: bool,
}

#[derive(Clone, Debug)]
pub enum SpectrumKind<T> {
    ContinuousDensity(SpectralDensity<T>),
    Lattice(LatticeSpectrum<T>),
    TorusCoefficients(TorusKernelSpec<T>),
    /// Sums, products and rescalings of the above, in Λ units.
    Composite(Vec<LambdaComponent<T>>),
}

/// A closed axis-aligned box, possibly degenerate.
pub type Cell<T> = Vec<(T, T)>;

#[derive(Clone, Debug, PartialEq)]
pub enum Support<T> {
    AllOfSpace,
    /// Finite union of boxes.
    CompactSet(Vec<Cell<T>>),
    /// Discrete support; `atoms` is `None` when infinitely many.
    LatticeSet {
        atoms: Option<Vec<Vec<T>>>,
        description: String,
    },
    AllOfIntegerLattice,
    ProperSubsetOfLattice {
        description: String,
    },
    /// Composition whose support could not be determined symbolically.
    Undetermined(String),
}

impl<T: Real> Support<T> {
    pub fn has_interior(&self) -> bool {
        match self {
            Support::AllOfSpace => true,
            Support::CompactSet(cells) => cells.iter().any(|c| c.iter().all(|&(lo, hi)| hi > lo)),
            _ => false,
        }
    }

    /// supp(Λ₁ + Λ₂)
    pub fn union(&self, other: &Support<T>) -> Support<T> {
        use Support::*;
        match (self, other) {
            (AllOfSpace, _) | (_, AllOfSpace) => AllOfSpace,
            (CompactSet(a), CompactSet(b)) => CompactSet(a.iter().chain(b).cloned().collect()),
            (CompactSet(a), LatticeSet { atoms: Some(p), .. }) | (LatticeSet { atoms: Some(p), .. }, CompactSet(a)) => {
                let mut cells = a.clone();
                cells.extend(p.iter().map(|x| x.iter().map(|&v| (v, v)).collect()));
                CompactSet(cells)
            }
            (LatticeSet { atoms: Some(a), .. }, LatticeSet { atoms: Some(b), .. }) => {
                let mut pts: Vec<Vec<T>> = a.clone();
                for p in b {
                    if !pts.contains(p) {
                        pts.push(p.clone());
                    }
                }
                LatticeSet {
                    description: describe_points(&pts),
                    atoms: Some(pts),
                }
            }
            (LatticeSet { description: d1, .. }, LatticeSet { description: d2, .. }) => LatticeSet {
                atoms: None,
                description: format!("{d1} ∪ {d2}"),
            },
            (a, b) => Undetermined(format!("union of {a} and {b}")),
        }
    }

    /// closure of supp(Λ₁) + supp(Λ₂)
    pub fn minkowski(&self, other: &Support<T>) -> Support<T> {
        use Support::*;
        let empty = |s: &Support<T>| matches!(s, LatticeSet { atoms: Some(p), .. } if p.is_empty());
        if empty(self) || empty(other) {
            return LatticeSet {
                atoms: Some(vec![]),
                description: "∅".into(),
            };
        }
        match (self, other) {
            (AllOfSpace, _) | (_, AllOfSpace) => AllOfSpace,
            (CompactSet(a), CompactSet(b)) => {
                let mut out = Vec::new();
                for ca in a {
                    for cb in b {
                        out.push(ca.iter().zip(cb).map(|(x, y)| (x.0 + y.0, x.1 + y.1)).collect());
                    }
                }
                CompactSet(out)
            }
            (CompactSet(a), LatticeSet { atoms: Some(p), .. }) | (LatticeSet { atoms: Some(p), .. }, CompactSet(a)) => {
                let mut out = Vec::new();
                for c in a {
                    for x in p {
                        out.push(c.iter().zip(x).map(|(iv, &s)| (iv.0 + s, iv.1 + s)).collect());
                    }
                }
                CompactSet(out)
            }
            (LatticeSet { atoms: Some(a), .. }, LatticeSet { atoms: Some(b), .. }) => {
                let mut pts: Vec<Vec<T>> = Vec::new();
                for x in a {
                    for y in b {
                        let s: Vec<T> = x.iter().zip(y).map(|(u, v)| *u + *v).collect();
                        if !pts.contains(&s) {
                            pts.push(s);
                        }
                    }
                }
                LatticeSet {
                    description: describe_points(&pts),
                    atoms: Some(pts),
                }
            }
            (
                LatticeSet {
                    atoms: None,
                    description,
                },
                LatticeSet { atoms: Some(p), .. },
            )
            | (
                LatticeSet { atoms: Some(p), .. },
                LatticeSet {
                    atoms: None,
                    description,
                },
            ) => LatticeSet {
                atoms: None,
                description: format!("{description} + {}", describe_points(p)),
            },
            (a, b) => Undetermined(format!("{a} + {b}")),
        }
    }
}

fn describe_points<T: Real>(pts: &[Vec<T>]) -> String {
    let items: Vec<String> = pts
        .iter()
        .map(|p| {
            if p.len() == 1 {
                format!("{}", p[0])
            } else {
                let c: Vec<String> = p.iter().map(|v| v.to_string()).collect();
                format!("({})", c.join(","))
            }
        })
        .collect();
    format!("{{{}}}", items.join(", "))
}

impl<T: Real> fmt::Display for Support<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Support::AllOfSpace => write!(f, "all of R^d"),
            Support::CompactSet(cells) => {
                let parts: Vec<String> = cells
                    .iter()
                    .map(|c| {
                        let iv: Vec<String> = c.iter().map(|(a, b)| format!("[{a}, {b}]")).collect();
                        iv.join("×")
                    })
                    .collect();
                write!(f, "compact {}", parts.join(" ∪ "))
            }
            Support::LatticeSet { description, .. } => write!(f, "discrete {description}"),
            Support::AllOfIntegerLattice => write!(f, "all of Z^d"),
            Support::ProperSubsetOfLattice { description } => write!(f, "proper subset of Z^d ({description})"),
            Support::Undetermined(s) => write!(f, "undetermined ({s})"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SpectrumInfo<T> {
    pub kind: SpectrumKind<T>,
    pub support: Support<T>,
}

/// A piece of a spectral measure, in Λ units.
#[derive(Clone, Debug)]
pub enum LambdaComponent<T> {
    /// dΛ = scale · (2π)^{-d/2} ψ̂(ω − shift) dω
    Density {
        density: SpectralDensity<T>,
        scale: T,
        shift: Vec<T>,
    },
    /// Point masses (location, Λ weight) plus the Λ-mass left out by truncation.
    Atoms { atoms: Vec<(Vec<T>, T)>, tail: T },
    /// Convolution of two absolutely continuous pieces (one-dimensional).
    Convolution(Box<LambdaComponent<T>>, Box<LambdaComponent<T>>),
}

impl<T: Real> LambdaComponent<T> {
    pub fn is_atomic(&self) -> bool {
        matches!(self, LambdaComponent::Atoms { .. })
    }

    /// Density with respect to Lebesgue measure (absolutely continuous pieces).
    pub fn density_at(&self, omega: &[T]) -> T {
        match self {
            LambdaComponent::Density { density, scale, shift } => {
                let w: Vec<T> = omega.iter().zip(shift).map(|(a, b)| *a - *b).collect();
                *scale * density.lambda(&w)
            }
            LambdaComponent::Atoms { .. } => T::zero(),
            LambdaComponent::Convolution(a, b) => {
                let w = omega[0];
                let mut pts = b.breakpoints_1d();
                pts.extend(a.breakpoints_1d().into_iter().map(|p| w - p));
                let (lo, hi) = match b.interval_1d() {
                    Some((l, h)) => (l, h),
                    None => (T::neg_infinity(), T::infinity()),
                };
                pts.retain(|p| *p > lo && *p < hi);
                pts.push(lo);
                pts.push(hi);
                Quad::with_tol(cst(1e-13))
                    .integrate(|eta| a.density_at(&[w - eta]) * b.density_at(&[eta]), &pts)
                    .value
            }
        }
    }

    pub fn breakpoints_1d(&self) -> Vec<T> {
        match self {
            LambdaComponent::Density { density, shift, .. } => {
                density.breakpoints.iter().map(|&p| p + shift[0]).collect()
            }
            LambdaComponent::Atoms { .. } => Vec::new(),
            LambdaComponent::Convolution(a, b) => {
                let mut out = Vec::new();
                for x in a.breakpoints_1d() {
                    for y in b.breakpoints_1d() {
                        out.push(x + y);
                    }
                }
                out
            }
        }
    }

    /// One-dimensional support interval, if bounded.
    pub fn interval_1d(&self) -> Option<(T, T)> {
        match self {
            LambdaComponent::Density { density, shift, .. } => {
                density.compact.as_ref().map(|c| (c[0].0 + shift[0], c[0].1 + shift[0]))
            }
            LambdaComponent::Atoms { atoms, .. } => {
                let lo = atoms.iter().map(|a| a.0[0]).fold(T::infinity(), T::min);
                let hi = atoms.iter().map(|a| a.0[0]).fold(T::neg_infinity(), T::max);
                Some((lo, hi))
            }
            LambdaComponent::Convolution(a, b) => match (a.interval_1d(), b.interval_1d()) {
                (Some((a0, a1)), Some((b0, b1))) => Some((a0 + b0, a1 + b1)),
                _ => None,
            },
        }
    }

    pub fn scaled(&self, c: T) -> LambdaComponent<T> {
        match self {
            LambdaComponent::Density { density, scale, shift } => LambdaComponent::Density {
                density: density.clone(),
                scale: *scale * c,
                shift: shift.clone(),
            },
            LambdaComponent::Atoms { atoms, tail } => LambdaComponent::Atoms {
                atoms: atoms.iter().map(|(x, w)| (x.clone(), *w * c)).collect(),
                tail: *tail * c.abs(),
            },
            LambdaComponent::Convolution(a, b) => LambdaComponent::Convolution(Box::new(a.scaled(c)), b.clone()),
        }
    }

    /// Total Λ mass, used to bound truncation errors of products.
    pub fn mass_bound(&self, psi0: T) -> T {
        match self {
            LambdaComponent::Atoms { atoms, tail } => atoms.iter().map(|a| a.1.abs()).sum::<T>() + *tail,
            _ => psi0,
        }
    }

    /// Λ₁ ∗ Λ₂ for two components.  `mass_self`/`mass_other` bound the
    /// total masses so that atom truncation tails can be propagated.
    pub fn convolve(&self, other: &LambdaComponent<T>, mass_self: T, mass_other: T) -> Vec<LambdaComponent<T>> {
        use LambdaComponent::*;
        match (self, other) {
            (Atoms { atoms: a, tail: ta }, Atoms { atoms: b, tail: tb }) => {
                let mut out = Vec::with_capacity(a.len() * b.len());
                for (x, wx) in a {
                    for (y, wy) in b {
                        let s: Vec<T> = x.iter().zip(y).map(|(u, v)| *u + *v).collect();
                        out.push((s, *wx * *wy));
                    }
                }
                vec![Atoms {
                    atoms: out,
                    tail: *ta * mass_other + *tb * mass_self,
                }]
            }
            (Atoms { atoms, tail }, dens) | (dens, Atoms { atoms, tail }) => {
                let mass_dens = if self.is_atomic() { mass_other } else { mass_self };
                let mut out: Vec<LambdaComponent<T>> = atoms.iter().map(|(x, w)| dens.shifted(x).scaled(*w)).collect();
                if *tail > T::zero() {
                    out.push(Atoms {
                        atoms: vec![],
                        tail: *tail * mass_dens,
                    });
                }
                out
            }
            (a, b) => vec![Convolution(Box::new(a.clone()), Box::new(b.clone()))],
        }
    }

    fn shifted(&self, by: &[T]) -> LambdaComponent<T> {
        match self {
            LambdaComponent::Density { density, scale, shift } => LambdaComponent::Density {
                density: density.clone(),
                scale: *scale,
                shift: shift.iter().zip(by).map(|(a, b)| *a + *b).collect(),
            },
            LambdaComponent::Atoms { atoms, tail } => LambdaComponent::Atoms {
                atoms: atoms
                    .iter()
                    .map(|(x, w)| (x.iter().zip(by).map(|(a, b)| *a + *b).collect(), *w))
                    .collect(),
                tail: *tail,
            },
            LambdaComponent::Convolution(a, b) => LambdaComponent::Convolution(Box::new(a.shifted(by)), b.clone()),
        }
    }
}

impl<T: Real> SpectrumInfo<T> {
    /// The spectral measure as a list of Λ-unit components.
    pub fn components(&self) -> Vec<LambdaComponent<T>> {
        match &self.kind {
            SpectrumKind::ContinuousDensity(d) => vec![LambdaComponent::Density {
                density: d.clone(),
                scale: T::one(),
                shift: vec![T::zero(); d.dim],
            }],
            SpectrumKind::Lattice(l) => {
                let c = fourier_norm::<T>(l.dim);
                vec![LambdaComponent::Atoms {
                    atoms: l.atoms.iter().map(|(x, w)| (x.clone(), *w * c)).collect(),
                    tail: l.tail,
                }]
            }
            SpectrumKind::TorusCoefficients(_) => Vec::new(),
            SpectrumKind::Composite(c) => c.clone(),
        }
    }
}
