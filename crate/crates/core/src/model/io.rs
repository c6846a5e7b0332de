//! JSON instance files.
//!
//! ```json
//! {"n":2,"m":2,"s":[1,2],"a":[1],"B":4,"lower":[0,0],"upper":[3,3],
//!  "mode":"continuous","objective":{"family":"quadratic","params":{"w":[1,1],"t":[0,0]}}}
//! ```
//!
//! Breakpoints are 1-based values in a 0-indexed array; `a` has `m - 1`
//! entries. Numbers are written with round-trip precision.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::instance::{Mode, NestedInstance};
use crate::model::objective::ObjectiveSpec;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    n: usize,
    m: usize,
    s: Vec<usize>,
    a: Vec<f64>,
    #[serde(rename = "B")]
    b: f64,
    lower: Vec<f64>,
    upper: Vec<f64>,
    mode: WireMode,
    objective: WireObjective,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum WireMode {
    Integer,
    Continuous,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "lowercase", deny_unknown_fields)]
enum WireObjective {
    F {
        p: Vec<f64>,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        reflect: bool,
    },
    Crashing {
        k: Vec<f64>,
        p: Vec<f64>,
    },
    FuelOpt {
        p: Vec<f64>,
        c: Vec<f64>,
    },
    Quadratic {
        w: Vec<f64>,
        t: Vec<f64>,
    },
}

/// Parse and validate an instance.
pub fn read_instance(bytes: &[u8]) -> Result<NestedInstance> {
    let file: InstanceFile = serde_json::from_slice(bytes)?;
    let objective = match file.objective {
        WireObjective::F { p, reflect } => ObjectiveSpec::F { p, reflect },
        WireObjective::Crashing { k, p } => ObjectiveSpec::Crashing { k, p },
        WireObjective::FuelOpt { p, c } => ObjectiveSpec::FuelOpt { p, c },
        WireObjective::Quadratic { w, t } => ObjectiveSpec::Quadratic { w, t },
    };
    let inst = NestedInstance {
        n: file.n,
        m: file.m,
        s: file.s,
        a: file.a,
        b: file.b,
        lower: file.lower,
        upper: file.upper,
        objective,
        mode: match file.mode {
            WireMode::Integer => Mode::Integer,
            WireMode::Continuous => Mode::Continuous,
        },
    };
    inst.validate()?;
    Ok(inst)
}

/// Serialize an instance. Custom objectives have no wire form.
pub fn write_instance(inst: &NestedInstance) -> Result<Vec<u8>> {
    let objective = match &inst.objective {
        ObjectiveSpec::F { p, reflect } => WireObjective::F { p: p.clone(), reflect: *reflect },
        ObjectiveSpec::Crashing { k, p } => WireObjective::Crashing { k: k.clone(), p: p.clone() },
        ObjectiveSpec::FuelOpt { p, c } => WireObjective::FuelOpt { p: p.clone(), c: c.clone() },
        ObjectiveSpec::Quadratic { w, t } => WireObjective::Quadratic { w: w.clone(), t: t.clone() },
        ObjectiveSpec::Custom(_) => return Err(Error::NotSerializable),
    };
    let file = InstanceFile {
        n: inst.n,
        m: inst.m,
        s: inst.s.clone(),
        a: inst.a.clone(),
        b: inst.b,
        lower: inst.lower.clone(),
        upper: inst.upper.clone(),
        mode: match inst.mode {
            Mode::Integer => WireMode::Integer,
            Mode::Continuous => WireMode::Continuous,
        },
        objective,
    };
    Ok(serde_json::to_vec(&file)?)
}
