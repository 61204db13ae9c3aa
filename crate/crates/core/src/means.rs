//! Scalar and matrix power means; the dense signed power mean Laplacian.
//!
//! The scalar power mean `m_p(a, b) = ((a^p + b^p)/2)^(1/p)` interpolates
//! minimum, harmonic, geometric, arithmetic and maximum as `p` runs from
//! `-inf` to `+inf`. Its matrix extension `M_p(A, B) = ((A^p + B^p)/2)^(1/p)`
//! applied to the diagonally shifted layer operators of a signed graph gives
//! the signed power mean Laplacian `L_p`.

use crate::dense::{eigh, geometric_mean, sym_power, SymMatrix};
use crate::error::{Error, Result};
use crate::graph::{Layer, SignedGraph};
use crate::scalar::Real;

/// Extended-real exponent: a finite value or one of the limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Power<F> {
    Finite(F),
    NegInf,
    PosInf,
}

impl<F: Real> Power<F> {
    pub fn finite(self) -> Option<F> {
        match self {
            Power::Finite(p) => Some(p),
            _ => None,
        }
    }

    /// True when the exponent is `<= 0` (including `-inf`), the regime in
    /// which a positive diagonal shift is mandatory.
    pub fn requires_shift(self) -> bool {
        match self {
            Power::Finite(p) => p <= F::zero(),
            Power::NegInf => true,
            Power::PosInf => false,
        }
    }

    /// `k' = k - 1` for `p >= 1`, else `k`: how many bottom eigenvectors the
    /// clustering algorithm consumes.
    pub fn informative_count(self, k: usize) -> usize {
        match self {
            Power::Finite(p) if p >= F::one() => k.saturating_sub(1),
            Power::PosInf => k.saturating_sub(1),
            _ => k,
        }
    }

    /// The finite exponent when it is a negative integer (the matrix-free
    /// regime), else `None`.
    pub fn as_negative_integer(self) -> Option<i64> {
        match self {
            Power::Finite(p) if p < F::zero() && p.fract() == F::zero() => p.to_i64(),
            _ => None,
        }
    }
}

impl<F: Real> std::fmt::Display for Power<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Power::Finite(p) => write!(f, "{p}"),
            Power::NegInf => write!(f, "-inf"),
            Power::PosInf => write!(f, "inf"),
        }
    }
}

/// Exponent plus diagonal shift for `L_p`.
///
/// The shift is applied to each layer operator inside the mean, never to the
/// result. The Laplacian entry points insist on `shift > 0` when `p <= 0`
/// (the layer operators are singular there); [`PowerParam::unchecked`] skips
/// that validation for callers whose inputs are already positive definite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerParam<F> {
    pub p: Power<F>,
    pub shift: F,
}

impl<F: Real> PowerParam<F> {
    /// Validated constructor: requires `shift >= 0`, and `shift > 0`
    /// whenever `p <= 0`.
    pub fn new(p: Power<F>, shift: F) -> Result<Self> {
        if shift < F::zero() || !shift.is_finite() {
            return Err(Error::Parameter(format!("negative or non-finite shift {shift}")));
        }
        if p.requires_shift() && shift <= F::zero() {
            return Err(Error::ShiftRequired { shift: shift.to_f64().unwrap_or(f64::NAN) });
        }
        Ok(Self { p, shift })
    }

    /// Finite exponent with the default experiment shift
    /// `log10(1 + |p|) + 1e-6`.
    pub fn with_default_shift(p: F) -> Self {
        Self { p: Power::Finite(p), shift: default_shift(Power::Finite(p)).expect("finite p") }
    }

    /// Unvalidated constructor for positive definite inputs.
    pub fn unchecked(p: Power<F>, shift: F) -> Self {
        Self { p, shift }
    }
}

/// Scalar power mean `m_p(a, b)`.
///
/// Limit cases: `p -> 0` is `sqrt(ab)`, `p -> +inf` is `max`, `p -> -inf`
/// is `min`. For `p <= 0` both arguments must be strictly positive; for
/// `p > 0` zeros are allowed.
pub fn scalar_power_mean<F: Real>(p: Power<F>, a: F, b: F) -> Result<F> {
    let domain_err = || Error::ScalarMeanDomain {
        a: a.to_f64().unwrap_or(f64::NAN),
        b: b.to_f64().unwrap_or(f64::NAN),
        p: p.to_string(),
    };
    if !a.is_finite() || !b.is_finite() || a < F::zero() || b < F::zero() {
        return Err(domain_err());
    }
    match p {
        Power::PosInf => Ok(a.max(b)),
        Power::NegInf => {
            if a <= F::zero() || b <= F::zero() {
                return Err(domain_err());
            }
            Ok(a.min(b))
        }
        Power::Finite(p) if p == F::zero() => {
            if a <= F::zero() || b <= F::zero() {
                return Err(domain_err());
            }
            Ok((a * b).sqrt())
        }
        Power::Finite(p) => {
            if p <= F::zero() && (a <= F::zero() || b <= F::zero()) {
                return Err(domain_err());
            }
            let half = F::real(0.5);
            Ok(((a.powf(p) + b.powf(p)) * half).powf(F::one() / p))
        }
    }
}

/// The experiment default `log10(1 + |p|) + 1e-6`; infinite exponents have
/// no default, the caller must supply a shift explicitly.
pub fn default_shift<F: Real>(p: Power<F>) -> Result<F> {
    match p {
        Power::Finite(p) => Ok((F::one() + p.abs()).log10() + F::real(1e-6)),
        _ => Err(Error::UnsupportedPower(format!(
            "no default shift for p = {p}; pass one explicitly"
        ))),
    }
}

/// Dense matrix power mean of diagonally shifted inputs,
/// `M_p(A + shift*I, B + shift*I)`.
///
/// `p = 0` routes through the geometric mean of the shifted inputs; the
/// infinite limits are rejected (they exist only for scalars and the
/// recovery predicates). For `p <= 0` the shifted inputs must be positive
/// definite; for `p >= 1` positive semidefinite suffices.
pub fn dense_power_mean<F: Real>(
    a: &SymMatrix<F>,
    b: &SymMatrix<F>,
    param: &PowerParam<F>,
) -> Result<SymMatrix<F>> {
    if a.order() != b.order() {
        return Err(Error::DimensionMismatch { expected: a.order(), got: b.order() });
    }
    let p = match param.p {
        Power::Finite(p) => p,
        other => {
            return Err(Error::UnsupportedPower(format!(
                "dense power mean is undefined at p = {other}"
            )))
        }
    };
    let shifted_a = a.add_scaled_identity(param.shift);
    let shifted_b = b.add_scaled_identity(param.shift);
    if p == F::zero() {
        return geometric_mean(&shifted_a, &shifted_b);
    }
    if p == F::one() {
        return shifted_a.add(&shifted_b).map(|s| s.scale(F::real(0.5)));
    }
    let half = F::real(0.5);
    if p >= F::one() {
        // Positive semidefinite inputs suffice; tiny negative roundoff is
        // flushed to zero before the powers and the fractional root.
        let pa = psd_power(&shifted_a, p)?;
        let pb = psd_power(&shifted_b, p)?;
        let sum = pa.add(&pb)?.scale(half);
        psd_power(&sum, F::one() / p)
    } else {
        // p < 1, p != 0: the shifted inputs must be positive definite. The
        // shift is passed through as the domain floor so genuine
        // definiteness violations surface instead of being regularized away.
        let floor = if param.shift > F::zero() { param.shift } else { F::min_positive_value() };
        let pa = sym_power(&shifted_a, p, floor)?;
        let pb = sym_power(&shifted_b, p, floor)?;
        let sum = pa.add(&pb)?.scale(half);
        let eig = eigh(&sum)?;
        let min = eig.values.first().copied().unwrap_or(F::zero());
        if min <= F::zero() {
            return Err(Error::Parameter(format!(
                "power mean sum lost definiteness (eigenvalue {min})"
            )));
        }
        let inv_p = F::one() / p;
        Ok(eig.assemble(|l| l.powf(inv_p)))
    }
}

/// `A^q` for positive semidefinite `A` and `q > 0`: eigenvalues within
/// roundoff of zero are clamped to zero, anything clearly negative is an
/// error.
fn psd_power<F: Real>(a: &SymMatrix<F>, q: F) -> Result<SymMatrix<F>> {
    let eig = eigh(a)?;
    let scale = eig.values.last().map(|l| l.abs()).unwrap_or(F::zero()).max(F::one());
    let tol = scale * F::real(1e-12);
    if let Some(&min) = eig.values.first() {
        if min < -tol {
            return Err(Error::Parameter(format!(
                "matrix is not positive semidefinite (eigenvalue {min})"
            )));
        }
    }
    let integral = q.fract() == F::zero();
    Ok(eig.assemble(|l| {
        let l = l.max(F::zero());
        if integral {
            l.powi64(q.to_i64().unwrap_or(0))
        } else {
            l.powf(q)
        }
    }))
}

/// Dense signed power mean Laplacian
/// `L_p = M_p(L_sym^+ + shift*I, Q_sym^- + shift*I)`.
pub fn dense_spm_laplacian<F: Real>(
    g: &SignedGraph<F>,
    param: &PowerParam<F>,
) -> Result<SymMatrix<F>> {
    if param.p.requires_shift() && param.shift <= F::zero() {
        return Err(Error::ShiftRequired { shift: param.shift.to_f64().unwrap_or(f64::NAN) });
    }
    let pos = g.layer_operator(Layer::PositiveLaplacian, F::zero())?.dense_matrix();
    let neg = g.layer_operator(Layer::NegativeSignless, F::zero())?.dense_matrix();
    dense_power_mean(&pos, &neg, param)
}
