//! Surface spec files: TOML with quoted expression strings.
//!
//! ```toml
//! [wdata]
//! g1 = "u"
//! g2 = "-v"
//! w1 = "1"
//! w2 = "1"
//!
//! [domain]
//! u = [0.5, 2.0]
//! v = [-2.0, -0.5]
//! grid = [128, 128]
//! ```
//!
//! A `[nullcurves]` block (`phi`, `psi`, three strings each, `form` either
//! `"position"` or `"velocity"`) may replace `[wdata]`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{parse, Expr, ParseError};
use crate::singular::ScanOptions;
use crate::surface::{from_null_curves, CurveForm, Domain, NullCurvePair, SurfaceError, Vec3, WData};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WDataBlock {
    pub g1: String,
    pub g2: String,
    pub w1: String,
    pub w2: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f0: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FormName {
    #[default]
    Position,
    Velocity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NullCurvesBlock {
    pub phi: [String; 3],
    pub psi: [String; 3],
    #[serde(default)]
    pub form: FormName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f0: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainBlock {
    pub u: [f64; 2],
    pub v: [f64; 2],
    #[serde(default = "default_grid")]
    pub grid: [usize; 2],
}

fn default_grid() -> [usize; 2] {
    [128, 128]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OptionsBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root_scan: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh_grid: Option<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wdata: Option<WDataBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nullcurves: Option<NullCurvesBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainBlock>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub options: OptionsBlock,
}

fn is_default(o: &OptionsBlock) -> bool {
    *o == OptionsBlock::default()
}

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("{0}")]
    Toml(#[from] toml::de::Error),
    #[error("field `{field}`: {source}")]
    Expr {
        field: String,
        #[source]
        source: ParseError,
    },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

impl SpecError {
    /// Parse-type failures as opposed to numeric ones.
    pub fn is_parse(&self) -> bool {
        match self {
            SpecError::Surface(s) => matches!(
                s,
                SurfaceError::Parse { .. } | SurfaceError::WrongVariable { .. } | SurfaceError::NotNull { .. }
            ),
            _ => true,
        }
    }
}

fn expr(field: &str, src: &str) -> Result<Expr, SpecError> {
    parse(src).map_err(|source| SpecError::Expr {
        field: field.to_string(),
        source,
    })
}

fn range(name: &str, r: [f64; 2]) -> Result<(f64, f64), SpecError> {
    if !(r[0].is_finite() && r[1].is_finite() && r[0] < r[1]) {
        return Err(SpecError::Invalid(format!("domain.{name} must be a nonempty finite range, got {r:?}")));
    }
    Ok((r[0], r[1]))
}

impl SurfaceSpec {
    pub fn from_toml(src: &str) -> Result<SurfaceSpec, SpecError> {
        let spec: SurfaceSpec = toml::from_str(src)?;
        spec.check()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }

    pub fn from_wdata(name: Option<&str>, w: &WData, domain: Option<&Domain>) -> SurfaceSpec {
        SurfaceSpec {
            name: name.map(str::to_string),
            wdata: Some(WDataBlock {
                g1: w.g1.to_string(),
                g2: w.g2.to_string(),
                w1: w.w1.to_string(),
                w2: w.w2.to_string(),
                base: (w.base != (0.0, 0.0)).then_some([w.base.0, w.base.1]),
                f0: (w.f0 != Vec3::zeros()).then_some([w.f0[0], w.f0[1], w.f0[2]]),
            }),
            nullcurves: None,
            domain: domain.map(|d| DomainBlock {
                u: [d.u.0, d.u.1],
                v: [d.v.0, d.v.1],
                grid: default_grid(),
            }),
            options: OptionsBlock::default(),
        }
    }

    fn check(&self) -> Result<(), SpecError> {
        match (&self.wdata, &self.nullcurves) {
            (Some(w), None) => {
                for (f, s) in [("wdata.g1", &w.g1), ("wdata.g2", &w.g2), ("wdata.w1", &w.w1), ("wdata.w2", &w.w2)] {
                    expr(f, s)?;
                }
            }
            (None, Some(n)) => {
                for (i, s) in n.phi.iter().enumerate() {
                    expr(&format!("nullcurves.phi[{i}]"), s)?;
                }
                for (i, s) in n.psi.iter().enumerate() {
                    expr(&format!("nullcurves.psi[{i}]"), s)?;
                }
            }
            _ => return Err(SpecError::Invalid("exactly one of [wdata] and [nullcurves] is required".into())),
        }
        if let Some(d) = &self.domain {
            range("u", d.u)?;
            range("v", d.v)?;
            if d.grid[0] < 2 || d.grid[1] < 2 {
                return Err(SpecError::Invalid("domain.grid needs at least 2 nodes per side".into()));
            }
        }
        Ok(())
    }

    pub fn domain(&self) -> Option<Domain> {
        self.domain.as_ref().map(|d| Domain::new((d.u[0], d.u[1]), (d.v[0], d.v[1])))
    }

    pub fn grid(&self) -> (usize, usize) {
        self.domain.as_ref().map_or((128, 128), |d| (d.grid[0], d.grid[1]))
    }

    pub fn mesh_grid(&self) -> (usize, usize) {
        self.options.mesh_grid.map_or_else(|| {
            let (a, b) = self.grid();
            (a.min(96), b.min(96))
        }, |g| (g[0], g[1]))
    }

    pub fn scan_options(&self) -> ScanOptions {
        let d = ScanOptions::default();
        let o = &self.options;
        ScanOptions {
            grid: self.grid(),
            curve_samples: o.curve_samples.unwrap_or(d.curve_samples),
            line_samples: o.line_samples.unwrap_or(d.line_samples),
            step: o.step.or(d.step),
            max_steps: o.max_steps.unwrap_or(d.max_steps),
            root_scan: o.root_scan.unwrap_or(d.root_scan),
        }
    }

    /// W-data, recovered from the null curves when given in that form.
    pub fn wdata(&self) -> Result<WData, SpecError> {
        if let Some(b) = &self.wdata {
            let mut w = WData::new(expr("wdata.g1", &b.g1)?, expr("wdata.g2", &b.g2)?, expr("wdata.w1", &b.w1)?, expr("wdata.w2", &b.w2)?)?;
            if let Some([u, v]) = b.base {
                w = w.with_base(u, v);
            }
            if let Some(f) = b.f0 {
                w = w.with_f0(Vec3::new(f[0], f[1], f[2]));
            }
            return Ok(w);
        }
        let n = self.nullcurves.as_ref().ok_or_else(|| SpecError::Invalid("no surface data".into()))?;
        let curves = |name: &str, s: &[String; 3]| -> Result<[Expr; 3], SpecError> {
            Ok([expr(&format!("{name}[0]"), &s[0])?, expr(&format!("{name}[1]"), &s[1])?, expr(&format!("{name}[2]"), &s[2])?])
        };
        let base = n.base.map_or((0.0, 0.0), |b| (b[0], b[1]));
        let pair = NullCurvePair {
            phi: curves("nullcurves.phi", &n.phi)?,
            psi: curves("nullcurves.psi", &n.psi)?,
            form: match n.form {
                FormName::Position => CurveForm::Position,
                FormName::Velocity => CurveForm::Velocity,
            },
            base,
            f0: n.f0.map(|f| Vec3::new(f[0], f[1], f[2])),
        };
        let domain = self
            .domain()
            .unwrap_or_else(|| Domain::new((base.0 - 1.0, base.0 + 1.0), (base.1 - 1.0, base.1 + 1.0)));
        Ok(from_null_curves(&pair, &domain)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ENNEPER: &str = r#"
name = "enneper"

[wdata]
g1 = "u"
g2 = "-v"
w1 = "1"
w2 = "1"

[domain]
u = [0.5, 2.0]
v = [-2.0, -0.5]
grid = [64, 64]
"#;

    #[test]
    fn parse_and_roundtrip() {
        let s = SurfaceSpec::from_toml(ENNEPER).unwrap();
        assert_eq!(s.grid(), (64, 64));
        let w = s.wdata().unwrap();
        assert_eq!(w.g2.eval_value(2.0).unwrap(), -2.0);
        let back = SurfaceSpec::from_toml(&s.to_toml()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn null_curve_form() {
        let src = r#"
[nullcurves]
phi = ["-u - u^3/3", "u - u^3/3", "u^2"]
psi = ["v + v^3/3", "v - v^3/3", "v^2"]
"#;
        let w = SurfaceSpec::from_toml(src).unwrap().wdata().unwrap();
        assert!((w.g1.eval_value(0.7).unwrap() - 0.7).abs() < 1e-12);
        assert!((w.g2.eval_value(0.7).unwrap() + 0.7).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_specs() {
        let both = format!("{ENNEPER}\n[nullcurves]\nphi = [\"u\", \"u\", \"0\"]\npsi = [\"v\", \"-v\", \"0\"]\n");
        assert!(matches!(SurfaceSpec::from_toml(&both), Err(SpecError::Invalid(_))));
        let bad = ENNEPER.replace("\"-v\"", "\"-v +\"");
        match SurfaceSpec::from_toml(&bad) {
            Err(SpecError::Expr { field, .. }) => assert_eq!(field, "wdata.g2"),
            other => panic!("{other:?}"),
        }
        let empty = ENNEPER.replace("[0.5, 2.0]", "[2.0, 2.0]");
        assert!(matches!(SurfaceSpec::from_toml(&empty), Err(SpecError::Invalid(_))));
        assert!(matches!(SurfaceSpec::from_toml("[wdata\n"), Err(SpecError::Toml(_))));
        assert!(SurfaceSpec::from_toml("").unwrap_err().is_parse());
    }
}
