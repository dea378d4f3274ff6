//! JSON descriptors for families and marked points, and the built-in registry.
//!
//! ```json
//! {
//!   "label": "z^2 + s",
//!   "degree": 2,
//!   "numerator": [["0", "1"], [], ["1"]],
//!   "denominator": [["1"], [], []],
//!   "marked": [{ "label": "critical", "num": ["0"], "den": ["1"] }]
//! }
//! ```
//!
//! `numerator[k]` lists the coefficients (by power of `s`) of `X^k Y^(d-k)`.
//! A missing denominator means `Y^d`.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::arith::{GaussianRational, ParamPolynomial};
use crate::error::{Error, ParseError};
use crate::family::{Form, MapFamily, MarkedPoint};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkedDescriptor {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub num: Vec<String>,
    #[serde(default = "one_poly")]
    pub den: Vec<String>,
}

fn one_poly() -> Vec<String> {
    vec!["1".into()]
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyDescriptor {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub degree: usize,
    pub numerator: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub denominator: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub marked: Vec<MarkedDescriptor>,
}

/// A parsed descriptor.
#[derive(Clone, Debug, PartialEq)]
pub struct LoadedFamily {
    pub label: Option<String>,
    pub family: MapFamily,
    pub marked: Vec<(Option<String>, MarkedPoint)>,
}

fn field(path: String, msg: impl ToString) -> Error {
    Error::Parse(ParseError::Field {
        path,
        msg: msg.to_string(),
    })
}

fn parse_poly(items: &[String], path: &str) -> Result<ParamPolynomial, Error> {
    let coeffs = items
        .iter()
        .enumerate()
        .map(|(k, t)| {
            t.parse::<GaussianRational>()
                .map_err(|e| field(format!("{path}[{k}]"), e))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ParamPolynomial::new(coeffs))
}

fn parse_form(rows: &[Vec<String>], degree: usize, path: &str) -> Result<Form, Error> {
    if rows.len() != degree + 1 {
        return Err(field(
            path.to_string(),
            format!("expected {} coefficient lists, found {}", degree + 1, rows.len()),
        ));
    }
    let coeffs = rows
        .iter()
        .enumerate()
        .map(|(k, row)| parse_poly(row, &format!("{path}[{k}]")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Form::new(coeffs))
}

fn print_poly(p: &ParamPolynomial) -> Vec<String> {
    if p.is_zero() {
        return vec!["0".into()];
    }
    p.coeffs().iter().map(ToString::to_string).collect()
}

fn print_form(f: &Form) -> Vec<Vec<String>> {
    f.coeffs().iter().map(print_poly).collect()
}

impl FamilyDescriptor {
    pub fn from_json(text: &str) -> Result<Self, ParseError> {
        serde_json::from_str(text).map_err(|e| ParseError::Json(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("descriptor serializes")
    }

    pub fn load(&self) -> Result<LoadedFamily, Error> {
        let d = self.degree;
        let p = parse_form(&self.numerator, d, "numerator")?;
        let q = match &self.denominator {
            Some(rows) => parse_form(rows, d, "denominator")?,
            None => {
                let mut q = vec![ParamPolynomial::zero(); d + 1];
                q[0] = ParamPolynomial::one();
                Form::new(q)
            }
        };
        let family = MapFamily::new(p, q).map_err(|e| field("numerator".into(), e))?;
        let marked = self
            .marked
            .iter()
            .enumerate()
            .map(|(k, m)| {
                let a = parse_poly(&m.num, &format!("marked[{k}].num"))?;
                let b = parse_poly(&m.den, &format!("marked[{k}].den"))?;
                let point = MarkedPoint::new(a, b).map_err(|e| field(format!("marked[{k}]"), e))?;
                Ok((m.label.clone(), point))
            })
            .collect::<Result<Vec<_>, Error>>()?;
        Ok(LoadedFamily {
            label: self.label.clone(),
            family,
            marked,
        })
    }

    /// Canonical descriptor: coefficient strings in canonical form, the
    /// denominator always written out.
    pub fn from_family(label: Option<String>, family: &MapFamily, marked: &[(Option<String>, MarkedPoint)]) -> Self {
        Self {
            label,
            degree: family.degree(),
            numerator: print_form(family.numerator()),
            denominator: Some(print_form(family.denominator())),
            marked: marked
                .iter()
                .map(|(label, m)| MarkedDescriptor {
                    label: label.clone(),
                    num: print_poly(m.a()),
                    den: print_poly(m.b()),
                })
                .collect(),
        }
    }
}

impl LoadedFamily {
    pub fn descriptor(&self) -> FamilyDescriptor {
        FamilyDescriptor::from_family(self.label.clone(), &self.family, &self.marked)
    }

    /// First marked point, or `0` when none is declared.
    pub fn default_marked(&self) -> MarkedPoint {
        self.marked
            .first()
            .map(|(_, m)| m.clone())
            .unwrap_or_else(|| MarkedPoint::constant(GaussianRational::zero()))
    }
}

/// `z^2 + c` written with a sign, e.g. `z^2 - 2`, `z^2 + i`, `z^2 + (1+i)`.
pub fn quadratic_label(c: &GaussianRational) -> String {
    let t = c.to_string();
    if c.is_zero() {
        return "z^2".to_string();
    }
    if c.re().is_zero() || c.im().is_zero() {
        if let Some(rest) = t.strip_prefix('-') {
            return format!("z^2 - {rest}");
        }
        return format!("z^2 + {t}");
    }
    format!("z^2 + ({t})")
}

/// Names accepted by [`builtin`].
pub const BUILTINS: &[&str] = &["z2", "quad", "unicritical:D", "quadc:C"];

/// Built-in families: `z2` (`z^2`), `quad` (`z^2 + s`), `unicritical:D`
/// (`z^D + s`) and `quadc:C` (the map `z^2 + C` for a Gaussian rational `C`).
/// Polynomial families carry the critical point `0` as marked point.
pub fn builtin(name: &str) -> Result<LoadedFamily, Error> {
    let name = name.strip_prefix("builtin:").unwrap_or(name);
    let unknown = || {
        field(
            "builtin".into(),
            format!("unknown family `{name}`, expected one of {}", BUILTINS.join(", ")),
        )
    };
    let critical = vec![(
        Some("critical".to_string()),
        MarkedPoint::constant(GaussianRational::zero()),
    )];
    let (label, family) = match name.split_once(':') {
        None if name == "z2" => ("z^2".to_string(), MapFamily::power(2)?),
        None if name == "quad" => ("z^2 + s".to_string(), MapFamily::quadratic()),
        Some(("unicritical", d)) => {
            let d: usize = d.parse().map_err(|_| unknown())?;
            (format!("z^{d} + s"), MapFamily::unicritical(d)?)
        }
        Some(("quadc", c)) => {
            let c: GaussianRational = c.parse()?;
            (quadratic_label(&c), MapFamily::quadratic_constant(c))
        }
        _ => return Err(unknown()),
    };
    Ok(LoadedFamily {
        label: Some(label),
        family,
        marked: critical,
    })
}
