//! Builtin analytic sources and CSV-backed fields.

use std::f64::consts::PI;

use curl_lambda::domain::{read_csv, FnField, LatticeField};
use curl_lambda::forcefree::{beltrami_plane_wave, beltrami_shear};
use curl_lambda::quaternion::I;
use curl_lambda::{Biquaternion, CVec3, Field, FieldKind, Point, C64};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::config::{c2, SourceConfig};
use crate::CliError;

pub type BoxField = Box<dyn Field + Send>;

pub const BUILTINS: [&str; 7] = [
    "smooth",
    "bump",
    "constant",
    "plane-wave",
    "gradient-wave",
    "beltrami-wave",
    "beltrami-shear",
];

fn one() -> [f64; 2] {
    [1.0, 0.0]
}

fn unit() -> f64 {
    1.0
}

fn z_axis() -> Point {
    [0.0, 0.0, 1.0]
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Amplitude {
    #[serde(default = "one")]
    amplitude: [f64; 2],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Bump {
    #[serde(default)]
    center: Point,
    #[serde(default = "unit")]
    radius: f64,
    #[serde(default = "one")]
    amplitude: [f64; 2],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Constant {
    value: [[f64; 2]; 3],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Wave {
    #[serde(default = "z_axis")]
    k: Point,
    #[serde(default = "one")]
    amplitude: [f64; 2],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Shear {
    #[serde(default)]
    axis: usize,
    #[serde(default)]
    phase: f64,
}

fn params<T: DeserializeOwned>(name: &str, p: &serde_json::Map<String, serde_json::Value>) -> Result<T, CliError> {
    serde_json::from_value(serde_json::Value::Object(p.clone()))
        .map_err(|e| CliError::Input(format!("bad params for builtin `{name}`: {e}")))
}

fn unit_vector(k: Point) -> Result<Point, CliError> {
    let n = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
    if n == 0.0 || !n.is_finite() {
        return Err(CliError::Input("wave vector k must be nonzero".into()));
    }
    Ok([k[0] / n, k[1] / n, k[2] / n])
}

fn dot(k: Point, x: Point) -> f64 {
    k[0] * x[0] + k[1] * x[1] + k[2] * x[2]
}

/// Resolves a source block into a field; `lambda` enters the wave builtins.
pub fn resolve(src: &SourceConfig, lambda: C64) -> Result<BoxField, CliError> {
    let b = match src {
        SourceConfig::Csv(c) => {
            let file = std::fs::File::open(&c.csv)
                .map_err(|e| CliError::Input(format!("cannot open {}: {e}", c.csv.display())))?;
            let sample = read_csv(file)?;
            return Ok(Box::new(LatticeField::from_sample(&sample)?));
        }
        SourceConfig::Builtin(b) => b,
    };
    let name = b.builtin.as_str();
    let field: BoxField = match name {
        "smooth" => {
            let a = c2(params::<Amplitude>(name, &b.params)?.amplitude);
            Box::new(FnField::vector(move |x| {
                CVec3::new(
                    C64::new(x[1].cos(), 0.2),
                    C64::new(x[0] * x[2], x[1] * x[1]),
                    C64::new(0.0, (x[0] + x[1]).sin()),
                )
                .scale(a)
            }))
        }
        "bump" => {
            let p: Bump = params(name, &b.params)?;
            if p.radius <= 0.0 || !p.radius.is_finite() {
                return Err(CliError::Input("bump radius must be positive".into()));
            }
            let a = c2(p.amplitude);
            Box::new(FnField::vector(move |x| {
                let d = [x[0] - p.center[0], x[1] - p.center[1], x[2] - p.center[2]];
                let r = dot(d, d).sqrt() / p.radius;
                if r >= 1.0 {
                    return CVec3::ZERO;
                }
                let s = 0.5 * (1.0 + (PI * r).cos());
                CVec3::new(C64::new(1.0 + d[1], 0.0), C64::new(d[2], 0.5), C64::new(d[0], 0.0)).scale(a * s)
            }))
        }
        "constant" => {
            let v = params::<Constant>(name, &b.params)?.value;
            let v = CVec3::new(c2(v[0]), c2(v[1]), c2(v[2]));
            Box::new(FnField::vector(move |_| v))
        }
        "plane-wave" => {
            let p: Wave = params(name, &b.params)?;
            let (k, a) = (unit_vector(p.k)?, c2(p.amplitude));
            let w0 = move |x: Point| a * (I * lambda * dot(k, x)).exp();
            Box::new(FnField::scalar(w0).with_partials(move |x| {
                let e = w0(x);
                [0, 1, 2].map(|j| Biquaternion::scalar(I * lambda * k[j] * e))
            }))
        }
        "gradient-wave" => {
            let p: Wave = params(name, &b.params)?;
            let (k, a) = (unit_vector(p.k)?, c2(p.amplitude));
            Box::new(FnField::vector(move |x| {
                CVec3::from_real(k).scale(-I * a * (I * lambda * dot(k, x)).exp())
            }))
        }
        "beltrami-wave" => {
            let p: Wave = params(name, &b.params)?;
            Box::new(beltrami_plane_wave(lambda, unit_vector(p.k)?)?.with_amplitude(c2(p.amplitude)))
        }
        "beltrami-shear" => {
            let p: Shear = params(name, &b.params)?;
            if p.axis > 2 {
                return Err(CliError::Input("beltrami-shear axis must be 0, 1 or 2".into()));
            }
            Box::new(beltrami_shear(lambda, p.axis, p.phase)?)
        }
        _ => {
            return Err(CliError::Input(format!(
                "unknown builtin source `{name}` (expected one of {})",
                BUILTINS.join(", ")
            )))
        }
    };
    Ok(field)
}

/// Rejects a source of the wrong kind before any numerics run.
pub fn expect_kind(f: &dyn Field, want: FieldKind, role: &str) -> Result<(), CliError> {
    let ok = match want {
        FieldKind::Scalar => f.kind() == FieldKind::Scalar,
        FieldKind::Vector => f.kind() == FieldKind::Vector,
        FieldKind::Full => true,
    };
    if ok {
        Ok(())
    } else {
        Err(CliError::Input(format!("{role} must be a {want:?} field, got {:?}", f.kind()).to_lowercase()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::BuiltinSource;
    use curl_lambda::quaternion::ONE;

    fn builtin(name: &str, params: serde_json::Value) -> SourceConfig {
        SourceConfig::Builtin(BuiltinSource {
            builtin: name.into(),
            params: params.as_object().cloned().unwrap_or_default(),
        })
    }

    #[test]
    fn every_builtin_resolves() {
        for name in BUILTINS {
            let p = if name == "constant" {
                serde_json::json!({"value": [[1, 0], [0, 1], [0, 0]]})
            } else {
                serde_json::json!({})
            };
            let f = resolve(&builtin(name, p), C64::new(2.0, 0.0)).unwrap();
            assert!(f.eval([0.1, 0.2, 0.3]).norm().is_finite());
        }
    }

    #[test]
    fn bump_vanishes_outside_its_support() {
        let f = resolve(&builtin("bump", serde_json::json!({"radius": 0.5})), ONE).unwrap();
        assert_eq!(f.eval([0.6, 0.0, 0.0]).norm(), 0.0);
        assert!(f.eval([0.1, 0.0, 0.0]).norm() > 0.0);
    }

    #[test]
    fn bad_builtins_rejected() {
        assert!(resolve(&builtin("nope", serde_json::json!({})), ONE).is_err());
        assert!(resolve(&builtin("smooth", serde_json::json!({"foo": 1})), ONE).is_err());
        assert!(resolve(&builtin("plane-wave", serde_json::json!({"k": [0, 0, 0]})), ONE).is_err());
    }
}
