//! Piecewise-continuous coefficient pairs `(w, q)` and the boundary problem
//!
//! ```text
//! y'' + (λ w(x) + q(x)) y = 0,   x ∈ [a, b]
//! y(a) cos α − y'(a) sin α = 0
//! y(b) cos β + y'(b) sin β = 0
//! ```
//!
//! The weight `w` is constant on each piece; the potential `q` is either
//! constant on a piece or given by a table interpolated linearly between its
//! nodes. At an interior breakpoint the right-hand piece wins.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, SlError};
use crate::scalar::Real;

/// Potential on one piece.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum QProfile<T> {
    Const(T),
    /// Nodes `(x, q(x))`, strictly increasing in `x`.
    Table(Vec<(T, T)>),
}

impl<T: Real> QProfile<T> {
    /// Value at `x`; tables are interpolated linearly and clamped at their ends.
    pub fn at(&self, x: T) -> T {
        match self {
            QProfile::Const(q) => *q,
            QProfile::Table(nodes) => interpolate(nodes, x),
        }
    }

    /// Restriction of the profile to `[x0, x1]`, with interpolated end nodes.
    pub fn restrict(&self, x0: T, x1: T) -> QProfile<T> {
        match self {
            QProfile::Const(q) => QProfile::Const(*q),
            QProfile::Table(nodes) => {
                let mut out = vec![(x0, interpolate(nodes, x0))];
                out.extend(nodes.iter().copied().filter(|&(x, _)| x > x0 && x < x1));
                out.push((x1, interpolate(nodes, x1)));
                QProfile::Table(out)
            }
        }
    }

    /// Multiply every value by `factor` and remap node abscissae with `map`.
    fn rescaled(&self, factor: T, map: impl Fn(T) -> T) -> QProfile<T> {
        match self {
            QProfile::Const(q) => QProfile::Const(*q * factor),
            QProfile::Table(nodes) => {
                QProfile::Table(nodes.iter().map(|&(x, q)| (map(x), q * factor)).collect())
            }
        }
    }

    /// Lower and upper bound of `q` over `[x0, x1]`.
    ///
    /// Exact for the linear interpolant: extrema sit at nodes or at the ends.
    pub fn range_on(&self, x0: T, x1: T) -> (T, T) {
        match self {
            QProfile::Const(q) => (*q, *q),
            QProfile::Table(nodes) => {
                let mut lo = interpolate(nodes, x0);
                let mut hi = lo;
                let end = interpolate(nodes, x1);
                lo = lo.min(end);
                hi = hi.max(end);
                for &(x, q) in nodes {
                    if x > x0 && x < x1 {
                        lo = lo.min(q);
                        hi = hi.max(q);
                    }
                }
                (lo, hi)
            }
        }
    }
}

fn interpolate<T: Real>(nodes: &[(T, T)], x: T) -> T {
    let first = nodes[0];
    let last = nodes[nodes.len() - 1];
    if x <= first.0 {
        return first.1;
    }
    if x >= last.0 {
        return last.1;
    }
    // first index with node.x > x
    let i = nodes.partition_point(|&(xn, _)| xn <= x);
    let (xl, ql) = nodes[i - 1];
    let (xr, qr) = nodes[i];
    let t = (x - xl) / (xr - xl);
    ql + (qr - ql) * t
}

/// One piece of the coefficient pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Piece<T> {
    pub x0: T,
    pub x1: T,
    pub w: T,
    pub q: QProfile<T>,
}

impl<T: Real> Piece<T> {
    pub fn constant(x0: T, x1: T, w: T, q: T) -> Self {
        Piece { x0, x1, w, q: QProfile::Const(q) }
    }

    pub fn length(&self) -> T {
        self.x1 - self.x0
    }

    fn validate(&self) -> Result<()> {
        let finite = self.x0.is_finite() && self.x1.is_finite() && self.w.is_finite();
        if !finite {
            return Err(invalid("piece has non-finite endpoint or weight"));
        }
        if !(self.x0 < self.x1) {
            return Err(invalid(format!("piece [{}, {}] is empty", self.x0, self.x1)));
        }
        if self.w == T::zero() {
            return Err(invalid(format!(
                "weight vanishes identically on [{}, {}]",
                self.x0, self.x1
            )));
        }
        match &self.q {
            QProfile::Const(q) if !q.is_finite() => Err(invalid("non-finite potential")),
            QProfile::Const(_) => Ok(()),
            QProfile::Table(nodes) => {
                if nodes.len() < 2 {
                    return Err(invalid("potential table needs at least two nodes"));
                }
                if nodes.iter().any(|(x, q)| !x.is_finite() || !q.is_finite()) {
                    return Err(invalid("non-finite potential table entry"));
                }
                if nodes.windows(2).any(|p| !(p[0].0 < p[1].0)) {
                    return Err(invalid("potential table abscissae must be strictly increasing"));
                }
                if nodes[0].0 > self.x0 || nodes[nodes.len() - 1].0 < self.x1 {
                    return Err(invalid(format!(
                        "potential table does not cover [{}, {}]",
                        self.x0, self.x1
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Stretch of the line on which `w` is constant and `q` is affine.
///
/// Constant-coefficient segments (`q0 == q1`) admit closed-form transfer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment<T> {
    pub x0: T,
    pub x1: T,
    pub w: T,
    pub q0: T,
    pub q1: T,
}

impl<T: Real> Segment<T> {
    pub fn is_constant(&self) -> bool {
        self.q0 == self.q1
    }

    pub fn length(&self) -> T {
        self.x1 - self.x0
    }

    pub fn q_at(&self, x: T) -> T {
        if self.is_constant() {
            return self.q0;
        }
        let t = (x - self.x0) / (self.x1 - self.x0);
        self.q0 + (self.q1 - self.q0) * t
    }

    /// Restriction to `[x0, x1] ⊂ [self.x0, self.x1]`.
    pub fn sub(&self, x0: T, x1: T) -> Segment<T> {
        Segment { x0, x1, w: self.w, q0: self.q_at(x0), q1: self.q_at(x1) }
    }
}

/// Coefficient pair tiling an interval with no gaps or overlaps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Piece<T>>", into = "Vec<Piece<T>>", bound = "T: Real + Serialize + serde::de::DeserializeOwned")]
pub struct PiecewiseCoefficient<T: Real> {
    pieces: Vec<Piece<T>>,
}

impl<T: Real> TryFrom<Vec<Piece<T>>> for PiecewiseCoefficient<T> {
    type Error = SlError;
    fn try_from(pieces: Vec<Piece<T>>) -> Result<Self> {
        Self::new(pieces)
    }
}

impl<T: Real> From<PiecewiseCoefficient<T>> for Vec<Piece<T>> {
    fn from(c: PiecewiseCoefficient<T>) -> Self {
        c.pieces
    }
}

impl<T: Real> PiecewiseCoefficient<T> {
    pub fn new(pieces: Vec<Piece<T>>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(invalid("coefficient needs at least one piece"));
        }
        for p in &pieces {
            p.validate()?;
        }
        for pair in pieces.windows(2) {
            if pair[0].x1 != pair[1].x0 {
                return Err(invalid(format!(
                    "pieces do not tile: {} != {}",
                    pair[0].x1, pair[1].x0
                )));
            }
        }
        Ok(PiecewiseCoefficient { pieces })
    }

    /// Single piece with constant coefficients.
    pub fn uniform(a: T, b: T, w: T, q: T) -> Result<Self> {
        Self::new(vec![Piece::constant(a, b, w, q)])
    }

    pub fn pieces(&self) -> &[Piece<T>] {
        &self.pieces
    }

    pub fn start(&self) -> T {
        self.pieces[0].x0
    }

    pub fn end(&self) -> T {
        self.pieces[self.pieces.len() - 1].x1
    }

    /// Interior breakpoints (piece boundaries strictly inside the domain).
    pub fn breakpoints(&self) -> Vec<T> {
        self.pieces[1..].iter().map(|p| p.x0).collect()
    }

    fn piece_index(&self, x: T) -> Result<usize> {
        let (a, b) = (self.start(), self.end());
        if !(x >= a && x <= b) {
            return Err(SlError::OutOfRange {
                x: x.to_f64_lossy(),
                a: a.to_f64_lossy(),
                b: b.to_f64_lossy(),
            });
        }
        let i = self.pieces.partition_point(|p| p.x1 <= x);
        Ok(i.min(self.pieces.len() - 1))
    }

    /// `(w(x), q(x))`, taking the right-hand piece at interior breakpoints.
    pub fn evaluate(&self, x: T) -> Result<(T, T)> {
        let p = &self.pieces[self.piece_index(x)?];
        Ok((p.w, p.q.at(x)))
    }

    /// Decompose `[x0, x1]` into segments, splitting at every breakpoint and
    /// table node. Outside the domain the end pieces are continued constantly.
    pub fn segments(&self, x0: T, x1: T) -> Vec<Segment<T>> {
        let mut out = Vec::new();
        if !(x0 < x1) {
            return out;
        }
        let (a, b) = (self.start(), self.end());
        if x0 < a {
            let p = &self.pieces[0];
            let q = p.q.at(a);
            out.push(Segment { x0, x1: x1.min(a), w: p.w, q0: q, q1: q });
        }
        for p in &self.pieces {
            let lo = p.x0.max(x0);
            let hi = p.x1.min(x1);
            if !(lo < hi) {
                continue;
            }
            match &p.q {
                QProfile::Const(q) => out.push(Segment { x0: lo, x1: hi, w: p.w, q0: *q, q1: *q }),
                QProfile::Table(nodes) => {
                    let mut xs = vec![lo];
                    xs.extend(nodes.iter().map(|n| n.0).filter(|&x| x > lo && x < hi));
                    xs.push(hi);
                    for s in xs.windows(2) {
                        out.push(Segment {
                            x0: s[0],
                            x1: s[1],
                            w: p.w,
                            q0: p.q.at(s[0]),
                            q1: p.q.at(s[1]),
                        });
                    }
                }
            }
        }
        if x1 > b {
            let p = &self.pieces[self.pieces.len() - 1];
            let q = p.q.at(b);
            out.push(Segment { x0: x0.max(b), x1, w: p.w, q0: q, q1: q });
        }
        out
    }

    /// Same pieces with the weight replaced by `f(w)`.
    pub fn map_weight(&self, f: impl Fn(T) -> T) -> Result<Self> {
        Self::new(
            self.pieces
                .iter()
                .map(|p| Piece { w: f(p.w), ..p.clone() })
                .collect(),
        )
    }

    /// Mirror image under `x → −x`, living on `[−b, −a]`.
    pub fn reflect(&self) -> Self {
        let pieces = self
            .pieces
            .iter()
            .rev()
            .map(|p| Piece {
                x0: -p.x1,
                x1: -p.x0,
                w: p.w,
                q: match &p.q {
                    QProfile::Const(q) => QProfile::Const(*q),
                    QProfile::Table(nodes) => {
                        QProfile::Table(nodes.iter().rev().map(|&(x, q)| (-x, q)).collect())
                    }
                },
            })
            .collect();
        PiecewiseCoefficient { pieces }
    }

    pub fn max_abs_weight(&self) -> T {
        self.pieces.iter().fold(T::zero(), |m, p| m.max(p.w.abs()))
    }

    /// Bounds of `μ w + q` over `[x0, x1]` (clipped to the domain).
    pub fn potential_range(&self, mu: T, x0: T, x1: T) -> Option<(T, T)> {
        let mut acc: Option<(T, T)> = None;
        for seg in self.segments(x0.max(self.start()), x1.min(self.end())) {
            let v0 = mu * seg.w + seg.q0;
            let v1 = mu * seg.w + seg.q1;
            let (lo, hi) = (v0.min(v1), v0.max(v1));
            acc = Some(match acc {
                None => (lo, hi),
                Some((l, h)) => (l.min(lo), h.max(hi)),
            });
        }
        acc
    }
}

/// The full boundary problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + serde::de::DeserializeOwned")]
pub struct ProblemSpec<T: Real> {
    pub a: T,
    pub b: T,
    pub alpha: T,
    pub beta: T,
    pub coeff: PiecewiseCoefficient<T>,
    /// Factor by which `w` and `q` were multiplied by [`normalize_domain`];
    /// one for problems built directly.
    pub scale: T,
}

impl<T: Real> ProblemSpec<T> {
    pub fn new(alpha: T, beta: T, coeff: PiecewiseCoefficient<T>) -> Result<Self> {
        let spec = ProblemSpec {
            a: coeff.start(),
            b: coeff.end(),
            alpha,
            beta,
            coeff,
            scale: T::one(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn dirichlet(coeff: PiecewiseCoefficient<T>) -> Result<Self> {
        Self::new(T::zero(), T::zero(), coeff)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a < self.b) {
            return Err(invalid(format!("degenerate interval [{}, {}]", self.a, self.b)));
        }
        if self.coeff.start() != self.a || self.coeff.end() != self.b {
            return Err(invalid("coefficient does not tile [a, b]"));
        }
        let pi = T::PI();
        for (name, ang) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(ang >= T::zero() && ang < pi) {
                return Err(invalid(format!("{name} = {ang} outside [0, π)")));
            }
        }
        Ok(())
    }

    pub fn is_dirichlet(&self) -> bool {
        self.alpha == T::zero() && self.beta == T::zero()
    }

    pub fn length(&self) -> T {
        self.b - self.a
    }

    /// Same boundary conditions, different coefficients.
    pub fn with_coeff(&self, coeff: PiecewiseCoefficient<T>) -> Result<Self> {
        let mut spec = Self::new(self.alpha, self.beta, coeff)?;
        spec.scale = self.scale;
        Ok(spec)
    }
}

/// Map the problem onto `[-1, 2]` by `x → (3x − (b + 2a)) / (b − a)`.
///
/// With `h = (b − a)/3` the transformed equation has weight `h² w` and
/// potential `h² q`, so eigenvalues are unchanged. Boundary angles are
/// adjusted so that the same solutions satisfy them; `scale` accumulates `h²`.
pub fn normalize_domain<T: Real>(spec: &ProblemSpec<T>) -> Result<ProblemSpec<T>> {
    spec.validate()?;
    let (one, two, three) = (T::one(), T::lit(2.0), T::lit(3.0));
    if spec.a == -one && spec.b == two {
        return Ok(spec.clone());
    }
    let (a, b) = (spec.a, spec.b);
    let h = (b - a) / three;
    let factor = h * h;
    let map = |x: T| {
        if x == a {
            -one
        } else if x == b {
            two
        } else {
            (three * x - (b + two * a)) / (b - a)
        }
    };
    let pieces = spec
        .coeff
        .pieces()
        .iter()
        .map(|p| Piece {
            x0: map(p.x0),
            x1: map(p.x1),
            w: p.w * factor,
            q: p.q.rescaled(factor, map),
        })
        .collect();
    let remap_angle = |ang: T| {
        let t = ang.sin().atan2(h * ang.cos());
        if t < T::zero() {
            t + T::PI()
        } else {
            t
        }
    };
    let coeff = PiecewiseCoefficient::new(pieces)?;
    let mut out = ProblemSpec::new(remap_angle(spec.alpha), remap_angle(spec.beta), coeff)?;
    out.scale = spec.scale * factor;
    Ok(out)
}

/// Canonical problems studied in the one- and two-turning-point theory.
#[derive(Clone, Debug, PartialEq)]
pub enum CanonicalProblem<T> {
    /// `−y'' + q0 y = λ sgn(x) y` on `[-1, 1]`, Dirichlet.
    ///
    /// `q0` is the potential of this self-adjoint form; in the
    /// `y'' + (λ w + q) y = 0` form the stored potential is `−q0`.
    OneTurningPoint { q0: T },
    /// Step weight `(A, B, C)` on `[-1,0], [0,1], [1,2]` with `A < 0 < B`,
    /// `C < 0`, constant potential `q0`, Dirichlet.
    TwoTurningPoint { a: T, b: T, c: T, q0: T },
    /// Weight `(−1, 2, −1)` on `[-1, 2]`, Dirichlet, the given potential.
    Application { q: QProfile<T> },
}

pub fn build_canonical<T: Real>(kind: &CanonicalProblem<T>) -> Result<ProblemSpec<T>> {
    let (zero, one, two) = (T::zero(), T::one(), T::lit(2.0));
    let coeff = match kind {
        CanonicalProblem::OneTurningPoint { q0 } => PiecewiseCoefficient::new(vec![
            Piece::constant(-one, zero, -one, -*q0),
            Piece::constant(zero, one, one, -*q0),
        ])?,
        CanonicalProblem::TwoTurningPoint { a, b, c, q0 } => {
            if !(*a < zero && *b > zero && *c < zero) {
                return Err(invalid(format!(
                    "two-turning-point weight needs A < 0 < B, C < 0 (got {a}, {b}, {c}); \
                     for the mirrored pattern replace λ by −λ and w by −w"
                )));
            }
            PiecewiseCoefficient::new(vec![
                Piece::constant(-one, zero, *a, *q0),
                Piece::constant(zero, one, *b, *q0),
                Piece::constant(one, two, *c, *q0),
            ])?
        }
        CanonicalProblem::Application { q } => {
            if let QProfile::Table(nodes) = q {
                let piece = Piece { x0: -one, x1: two, w: one, q: q.clone() };
                piece.validate()?;
                debug_assert!(nodes.len() >= 2);
            }
            PiecewiseCoefficient::new(vec![
                Piece { x0: -one, x1: zero, w: -one, q: q.restrict(-one, zero) },
                Piece { x0: zero, x1: one, w: two, q: q.restrict(zero, one) },
                Piece { x0: one, x1: two, w: -one, q: q.restrict(one, two) },
            ])?
        }
    };
    ProblemSpec::dirichlet(coeff)
}
