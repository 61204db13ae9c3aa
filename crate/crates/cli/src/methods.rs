//! Method-string handling shared by the subcommands.

use anyhow::{bail, Result};

use spml::baselines::MethodSpec;
use spml::means::{default_shift, Power, PowerParam};
use spml::ssbm::RegionMethod;

/// Shift selection: the experiment default `log10(1+|p|) + 1e-6` or an
/// explicit value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShiftChoice {
    Auto,
    Fixed(f64),
}

impl ShiftChoice {
    pub fn parse(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(ShiftChoice::Auto);
        }
        let v: f64 = s.parse().map_err(|_| anyhow::anyhow!("invalid shift {s:?}"))?;
        if !v.is_finite() || v < 0.0 {
            bail!("shift must be finite and nonnegative, got {s}");
        }
        Ok(ShiftChoice::Fixed(v))
    }

    pub fn resolve(self, p: Power<f64>) -> Result<f64> {
        match self {
            ShiftChoice::Fixed(v) => Ok(v),
            ShiftChoice::Auto => Ok(default_shift(p)?),
        }
    }
}

/// Parses a clustering method, applying the shift choice and the
/// matrix-free toggle to power mean methods.
///
/// `matrix_free` may be `Some(forced)` or `None` for the automatic rule:
/// matrix-free exactly when `p` is a negative integer.
pub fn parse_method(
    name: &str,
    shift: ShiftChoice,
    matrix_free: Option<bool>,
) -> Result<MethodSpec<f64>> {
    let spec = MethodSpec::parse(name)?;
    Ok(match spec {
        MethodSpec::PowerMean { param, .. } => {
            let shift_v = shift.resolve(param.p)?;
            let is_neg_int = param.p.as_negative_integer().is_some();
            let free = matrix_free.unwrap_or(is_neg_int);
            if free && !is_neg_int {
                bail!("matrix-free path requires a negative integer p, got {}", param.p);
            }
            MethodSpec::PowerMean {
                param: PowerParam::new(param.p, shift_v)?,
                matrix_free: free,
            }
        }
        MethodSpec::Gm { .. } => match shift {
            ShiftChoice::Fixed(v) => MethodSpec::Gm { shift: v },
            ShiftChoice::Auto => spec,
        },
        other => other,
    })
}

/// Parses a region-study method: power means here may be infinite.
pub fn parse_region_method(name: &str, shift: ShiftChoice) -> Result<RegionMethod<f64>> {
    let lower = name.trim().to_ascii_lowercase();
    match lower.as_str() {
        "sn" | "bn" => return Ok(RegionMethod::ArithmeticFamily),
        "bethe" => return Ok(RegionMethod::BetheLimit),
        _ => {}
    }
    if let Some(p_str) = lower.strip_prefix("pm:") {
        let p = match p_str {
            "inf" | "+inf" => Power::PosInf,
            "-inf" => Power::NegInf,
            _ => {
                let v: f64 = p_str
                    .parse()
                    .map_err(|_| anyhow::anyhow!("invalid exponent {p_str:?}"))?;
                Power::Finite(v)
            }
        };
        let shift_v = match (shift, p) {
            (ShiftChoice::Fixed(v), _) => v,
            (ShiftChoice::Auto, Power::Finite(_)) => shift.resolve(p)?,
            // the limit predicates are shift-invariant; any positive value works
            (ShiftChoice::Auto, _) => 1e-6,
        };
        return Ok(RegionMethod::PowerMean { p, shift: shift_v });
    }
    bail!("unknown region method {name:?}; expected pm:<p|inf|-inf>, sn, bn, or bethe")
}

/// Canonical display name of a region method.
pub fn region_method_name(m: &RegionMethod<f64>) -> String {
    match m {
        RegionMethod::PowerMean { p, .. } => format!("pm:{p}"),
        RegionMethod::ArithmeticFamily => "sn/bn".into(),
        RegionMethod::BetheLimit => "bethe".into(),
    }
}
