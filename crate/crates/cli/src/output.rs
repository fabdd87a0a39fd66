use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// Bumped whenever a field is renamed or removed from any JSON payload.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cx {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for Cx {
    fn from(z: Complex64) -> Self {
        // Normalise -0.0 so output is stable across platforms.
        Cx { re: z.re + 0.0, im: z.im + 0.0 }
    }
}

impl From<Cx> for Complex64 {
    fn from(z: Cx) -> Self {
        Complex64::new(z.re, z.im)
    }
}

/// Entry of an input block: either `{"re": .., "im": ..}` or a bare real.
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(untagged)]
pub enum CxIn {
    Pair(Cx),
    Real(f64),
}

impl From<CxIn> for Complex64 {
    fn from(z: CxIn) -> Self {
        match z {
            CxIn::Pair(c) => c.into(),
            CxIn::Real(r) => Complex64::new(r, 0.0),
        }
    }
}

pub fn block_from_json(rows: [[CxIn; 2]; 2]) -> Matrix2<Complex64> {
    Matrix2::new(rows[0][0].into(), rows[0][1].into(), rows[1][0].into(), rows[1][1].into())
}

pub fn matrix_json(m: &DMatrix<Complex64>) -> Value {
    let rows: Vec<Vec<Cx>> = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].into()).collect()).collect();
    json!(rows)
}

pub fn complex_json(z: Complex64) -> Value {
    json!(Cx::from(z))
}

/// Long-format CSV: one line per entry.
pub fn matrix_csv(m: &DMatrix<Complex64>) -> String {
    let mut out = String::from("row,col,re,im\n");
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = Cx::from(m[(i, j)]);
            out.push_str(&format!("{i},{j},{:e},{:e}\n", z.re, z.im));
        }
    }
    out
}

fn fmt_real(x: f64) -> String {
    let x = x + 0.0;
    if x == x.round() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x:.6}")
    }
}

pub fn fmt_complex(z: Complex64) -> String {
    let tiny = 1e-14 * z.norm().max(1.0);
    match (z.re.abs() > tiny, z.im.abs() > tiny) {
        (false, false) => "0".to_string(),
        (true, false) => fmt_real(z.re),
        (false, true) => format!("{}i", fmt_real(z.im)),
        (true, true) => {
            let sign = if z.im < 0.0 { '-' } else { '+' };
            format!("{}{sign}{}i", fmt_real(z.re), fmt_real(z.im.abs()))
        }
    }
}

pub fn matrix_pretty(m: &DMatrix<Complex64>) -> String {
    let rows: Vec<String> = (0..m.nrows())
        .map(|i| format!("[{}]", (0..m.ncols()).map(|j| fmt_complex(m[(i, j)])).collect::<Vec<_>>().join(", ")))
        .collect();
    format!("[{}]", rows.join(",\n "))
}

/// Wraps a payload with the schema version and command name.
pub fn envelope(command: &str, mut payload: Value) -> Value {
    let mut out = json!({ "schema_version": SCHEMA_VERSION, "command": command });
    if let (Some(dst), Some(src)) = (out.as_object_mut(), payload.as_object_mut()) {
        dst.append(src);
    }
    out
}

pub fn to_string(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values always serialise")
}
