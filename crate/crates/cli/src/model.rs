//! Experiment files: parsing, validation, canonical serialization.
//!
//! The on-disk format is a single JSON object:
//!
//! ```json
//! {
//!   "space": ["00", "01"],
//!   "family": { "0.2": ["4/5", "1/5"] },
//!   "estimand": { "0.2": ["1/5"] },
//!   "kernels": { "name": { "target": [...], "rows": { "00": [...] } } },
//!   "statistics": { "name": { "target": [...], "map": { "00": "t" } } },
//!   "grids": { "name": { "space": "name-or-space", "dim": 1, "values": { "t": ["1/2"] } } }
//! }
//! ```
//!
//! Numbers may be JSON numbers or strings; either way the literal text
//! is parsed by the active backend, so "0.2" and "1/5" are the same
//! exact rational. Point and parameter labels keep their literal
//! spelling. Every diagnostic carries the key path of the offending
//! element.

use serde_json::{Map, Value};

use mkstat_core::{
    Distribution, Experiment, FiniteSpace, Kernel, RealKernel, Scalar, Statistic, Tol, ValueGrid,
};

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid JSON: {source}")]
    Json {
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {message}")]
    Validation { path: String, message: String },
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> LoadError {
    LoadError::Validation { path: path.into(), message: message.into() }
}

/// A value grid together with the name of the object whose target
/// space it describes ("space" for the sample space itself).
#[derive(Clone, Debug, PartialEq)]
pub struct GridEntry<S: Scalar> {
    pub attach: String,
    pub grid: ValueGrid<S>,
}

/// A fully validated experiment file. Entry order follows the file.
#[derive(Clone, Debug, PartialEq)]
pub struct Model<S: Scalar> {
    pub experiment: Experiment<S>,
    pub kernels: Vec<(String, Kernel<S>)>,
    pub statistics: Vec<(String, Statistic)>,
    pub grids: Vec<(String, GridEntry<S>)>,
}

pub fn load<S: Scalar>(path: &str, tol: Tol) -> Result<Model<S>, LoadError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| LoadError::Io { path: path.to_string(), source })?;
    parse(&text, tol)
}

pub fn parse<S: Scalar>(text: &str, tol: Tol) -> Result<Model<S>, LoadError> {
    let root: Value = serde_json::from_str(text).map_err(|source| LoadError::Json { source })?;
    build(&root, tol)
}

/// The literal text of a JSON string or number token.
fn literal(v: &Value, path: &str) -> Result<String, LoadError> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        other => Err(invalid(path, format!("expected a string or number, found {other}"))),
    }
}

fn scalar_from<S: Scalar>(v: &Value, path: &str) -> Result<S, LoadError> {
    let text = literal(v, path)?;
    S::parse_text(&text)
        .ok_or_else(|| invalid(path, format!("cannot read {text:?} as a number")))
}

fn as_object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, LoadError> {
    v.as_object().ok_or_else(|| invalid(path, "expected an object"))
}

fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>, LoadError> {
    v.as_array().ok_or_else(|| invalid(path, "expected an array"))
}

fn label_list(v: &Value, path: &str) -> Result<Vec<String>, LoadError> {
    as_array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, item)| literal(item, &format!("{path}/{i}")))
        .collect()
}

fn scalar_list<S: Scalar>(v: &Value, path: &str, expected: usize) -> Result<Vec<S>, LoadError> {
    let arr = as_array(v, path)?;
    if arr.len() != expected {
        return Err(invalid(path, format!("expected {expected} entries, found {}", arr.len())));
    }
    arr.iter()
        .enumerate()
        .map(|(i, item)| scalar_from(item, &format!("{path}/{i}")))
        .collect()
}

/// Space constructor with the error mapped onto a key path.
fn space_from(id: &str, points: Vec<String>, path: &str) -> Result<FiniteSpace, LoadError> {
    FiniteSpace::new(id, points).map_err(|e| invalid(path, e.to_string()))
}

fn build<S: Scalar>(root: &Value, tol: Tol) -> Result<Model<S>, LoadError> {
    let top = as_object(root, "document")?;
    for key in top.keys() {
        if !["space", "family", "estimand", "kernels", "statistics", "grids"]
            .contains(&key.as_str())
        {
            return Err(invalid(key, "unknown top-level key"));
        }
    }

    let space_value =
        top.get("space").ok_or_else(|| invalid("space", "missing required key"))?;
    let space = space_from("space", label_list(space_value, "space")?, "space")?;

    let family_value =
        top.get("family").ok_or_else(|| invalid("family", "missing required key"))?;
    let family = as_object(family_value, "family")?;
    let mut members = Vec::with_capacity(family.len());
    for (theta, masses) in family {
        let path = format!("family/{theta}");
        let mass = scalar_list::<S>(masses, &path, space.len())?;
        let d = Distribution::with_tol(space.clone(), mass, tol)
            .map_err(|e| invalid(&path, e.to_string()))?;
        members.push((theta.clone(), d));
    }
    let mut experiment =
        Experiment::new(space.clone(), members).map_err(|e| invalid("family", e.to_string()))?;

    if let Some(est_value) = top.get("estimand") {
        let est = as_object(est_value, "estimand")?;
        for key in est.keys() {
            if !experiment.thetas().contains(key) {
                return Err(invalid(
                    format!("estimand/{key}"),
                    "parameter does not appear in the family",
                ));
            }
        }
        let mut rows = Vec::with_capacity(experiment.theta_count());
        let mut dim = None;
        for theta in experiment.thetas().to_vec() {
            let path = format!("estimand/{theta}");
            let value = est
                .get(&theta)
                .ok_or_else(|| invalid(&path, "missing estimand for this parameter"))?;
            let arr = as_array(value, &path)?;
            let d = *dim.get_or_insert(arr.len());
            rows.push(scalar_list::<S>(value, &path, d)?);
        }
        experiment =
            experiment.with_estimand(rows).map_err(|e| invalid("estimand", e.to_string()))?;
    }

    let mut kernels = Vec::new();
    if let Some(kernels_value) = top.get("kernels") {
        for (name, spec) in as_object(kernels_value, "kernels")? {
            let path = format!("kernels/{name}");
            let spec = as_object(spec, &path)?;
            let target_value = spec
                .get("target")
                .ok_or_else(|| invalid(format!("{path}/target"), "missing required key"))?;
            let target = space_from(
                name,
                label_list(target_value, &format!("{path}/target"))?,
                &format!("{path}/target"),
            )?;
            let rows_value = spec
                .get("rows")
                .ok_or_else(|| invalid(format!("{path}/rows"), "missing required key"))?;
            let rows_map = as_object(rows_value, &format!("{path}/rows"))?;
            for key in rows_map.keys() {
                if !space.points().contains(key) {
                    return Err(invalid(
                        format!("{path}/rows/{key}"),
                        "not a point of the space",
                    ));
                }
            }
            let mut rows = Vec::with_capacity(space.len());
            for point in space.points() {
                let row_path = format!("{path}/rows/{point}");
                let row_value = rows_map
                    .get(point)
                    .ok_or_else(|| invalid(&row_path, "missing row for this point"))?;
                rows.push(scalar_list::<S>(row_value, &row_path, target.len())?);
            }
            let kernel =
                Kernel::with_tol(space.clone(), target, rows, tol).map_err(|e| match &e {
                    mkstat_core::Error::RowNotStochastic { row, detail } => {
                        invalid(format!("{path}/rows/{row}"), detail.clone())
                    }
                    other => invalid(&path, other.to_string()),
                })?;
            kernels.push((name.clone(), kernel));
        }
    }

    let mut statistics = Vec::new();
    if let Some(stats_value) = top.get("statistics") {
        for (name, spec) in as_object(stats_value, "statistics")? {
            let path = format!("statistics/{name}");
            if kernels.iter().any(|(k, _)| k == name) {
                return Err(invalid(&path, "name already used by a kernel"));
            }
            let spec = as_object(spec, &path)?;
            let target_value = spec
                .get("target")
                .ok_or_else(|| invalid(format!("{path}/target"), "missing required key"))?;
            let target = space_from(
                name,
                label_list(target_value, &format!("{path}/target"))?,
                &format!("{path}/target"),
            )?;
            let map_value = spec
                .get("map")
                .ok_or_else(|| invalid(format!("{path}/map"), "missing required key"))?;
            let map_obj = as_object(map_value, &format!("{path}/map"))?;
            for key in map_obj.keys() {
                if !space.points().contains(key) {
                    return Err(invalid(format!("{path}/map/{key}"), "not a point of the space"));
                }
            }
            let mut map = Vec::with_capacity(space.len());
            for point in space.points() {
                let entry_path = format!("{path}/map/{point}");
                let entry = map_obj
                    .get(point)
                    .ok_or_else(|| invalid(&entry_path, "missing image for this point"))?;
                let target_label = literal(entry, &entry_path)?;
                let index = target
                    .points()
                    .iter()
                    .position(|p| *p == target_label)
                    .ok_or_else(|| {
                        invalid(&entry_path, format!("{target_label:?} is not a target point"))
                    })?;
                map.push(index);
            }
            let statistic = Statistic::from_indices(space.clone(), target, map)
                .map_err(|e| invalid(&path, e.to_string()))?;
            statistics.push((name.clone(), statistic));
        }
    }

    let mut grids = Vec::new();
    if let Some(grids_value) = top.get("grids") {
        for (name, spec) in as_object(grids_value, "grids")? {
            let path = format!("grids/{name}");
            let spec = as_object(spec, &path)?;
            let attach_value = spec
                .get("space")
                .ok_or_else(|| invalid(format!("{path}/space"), "missing required key"))?;
            let attach = literal(attach_value, &format!("{path}/space"))?;
            let carrier = if attach == "space" {
                space.clone()
            } else if let Some((_, k)) = kernels.iter().find(|(n, _)| *n == attach) {
                k.target().clone()
            } else if let Some((_, s)) = statistics.iter().find(|(n, _)| *n == attach) {
                s.target().clone()
            } else {
                return Err(invalid(
                    format!("{path}/space"),
                    format!("{attach:?} names no kernel, statistic, or the space"),
                ));
            };
            let dim_value = spec
                .get("dim")
                .ok_or_else(|| invalid(format!("{path}/dim"), "missing required key"))?;
            let dim = dim_value
                .as_u64()
                .filter(|&d| d >= 1)
                .ok_or_else(|| invalid(format!("{path}/dim"), "expected a positive integer"))?
                as usize;
            let values_value = spec
                .get("values")
                .ok_or_else(|| invalid(format!("{path}/values"), "missing required key"))?;
            let values_map = as_object(values_value, &format!("{path}/values"))?;
            for key in values_map.keys() {
                if !carrier.points().contains(key) {
                    return Err(invalid(
                        format!("{path}/values/{key}"),
                        "not a point of the grid's space",
                    ));
                }
            }
            let mut values = Vec::with_capacity(carrier.len());
            for point in carrier.points() {
                let value_path = format!("{path}/values/{point}");
                let value = values_map
                    .get(point)
                    .ok_or_else(|| invalid(&value_path, "missing value for this point"))?;
                values.push(scalar_list::<S>(value, &value_path, dim)?);
            }
            let grid = ValueGrid::new(carrier, dim, values)
                .map_err(|e| invalid(&path, e.to_string()))?;
            grids.push((name.clone(), GridEntry { attach, grid }));
        }
    }

    Ok(Model { experiment, kernels, statistics, grids })
}

impl<S: Scalar> Model<S> {
    /// Kernel by name; statistic names resolve to their Dirac kernel.
    pub fn kernel_named(&self, name: &str) -> Result<Kernel<S>, String> {
        if let Some((_, k)) = self.kernels.iter().find(|(n, _)| n == name) {
            return Ok(k.clone());
        }
        if let Some((_, s)) = self.statistics.iter().find(|(n, _)| n == name) {
            return Ok(Kernel::dirac(s));
        }
        Err(format!("no kernel or statistic named {name:?}"))
    }

    pub fn statistic_named(&self, name: &str) -> Result<&Statistic, String> {
        self.statistics
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, s)| s)
            .ok_or_else(|| format!("no statistic named {name:?}"))
    }

    /// Grid attached to the named object, or the grid read off its
    /// target labels when they are all numeric.
    pub fn grid_for(&self, name: &str, target: &FiniteSpace) -> Option<ValueGrid<S>> {
        if let Some((_, entry)) = self.grids.iter().find(|(_, g)| g.attach == name) {
            return Some(entry.grid.clone());
        }
        let parsed: Option<Vec<S>> =
            target.points().iter().map(|p| S::parse_text(p)).collect();
        parsed.and_then(|values| ValueGrid::scalar(target.clone(), values).ok())
    }

    /// Estimator by name: a kernel or statistic together with values on
    /// its target.
    pub fn estimator_named(&self, name: &str) -> Result<RealKernel<S>, String> {
        let kernel = self.kernel_named(name)?;
        let grid = self.grid_for(name, kernel.target()).ok_or_else(|| {
            format!(
                "estimator {name:?} has no usable values: attach a grid to it or use numeric target labels"
            )
        })?;
        RealKernel::new(kernel, grid).map_err(|e| format!("estimator {name:?}: {e}"))
    }

    /// Canonical JSON rendering; `parse` of the result reproduces the
    /// model exactly.
    pub fn to_json(&self) -> Value {
        let mut top = Map::new();
        let e = &self.experiment;
        top.insert("space".into(), labels_json(e.space()));
        let mut family = Map::new();
        for (i, theta) in e.thetas().iter().enumerate() {
            let masses: Vec<Value> =
                e.member(i).mass().iter().map(|m| Value::String(m.to_string())).collect();
            family.insert(theta.clone(), Value::Array(masses));
        }
        top.insert("family".into(), Value::Object(family));
        if let Some(est) = e.estimand() {
            let mut map = Map::new();
            for (i, theta) in e.thetas().iter().enumerate() {
                let row: Vec<Value> =
                    est.value(i).iter().map(|v| Value::String(v.to_string())).collect();
                map.insert(theta.clone(), Value::Array(row));
            }
            top.insert("estimand".into(), Value::Object(map));
        }
        if !self.kernels.is_empty() {
            let mut map = Map::new();
            for (name, k) in &self.kernels {
                let mut spec = Map::new();
                spec.insert("target".into(), labels_json(k.target()));
                let mut rows = Map::new();
                for (i, point) in k.source().points().iter().enumerate() {
                    let row: Vec<Value> =
                        k.row(i).iter().map(|x| Value::String(x.to_string())).collect();
                    rows.insert(point.clone(), Value::Array(row));
                }
                spec.insert("rows".into(), Value::Object(rows));
                map.insert(name.clone(), Value::Object(spec));
            }
            top.insert("kernels".into(), Value::Object(map));
        }
        if !self.statistics.is_empty() {
            let mut map = Map::new();
            for (name, s) in &self.statistics {
                let mut spec = Map::new();
                spec.insert("target".into(), labels_json(s.target()));
                let mut entries = Map::new();
                for (i, point) in s.source().points().iter().enumerate() {
                    entries.insert(
                        point.clone(),
                        Value::String(s.target().label(s.apply_index(i)).to_string()),
                    );
                }
                spec.insert("map".into(), Value::Object(entries));
                map.insert(name.clone(), Value::Object(spec));
            }
            top.insert("statistics".into(), Value::Object(map));
        }
        if !self.grids.is_empty() {
            let mut map = Map::new();
            for (name, entry) in &self.grids {
                let mut spec = Map::new();
                spec.insert("space".into(), Value::String(entry.attach.clone()));
                spec.insert("dim".into(), Value::Number(serde_json::Number::from(entry.grid.dim())));
                let mut values = Map::new();
                for (i, point) in entry.grid.space().points().iter().enumerate() {
                    let row: Vec<Value> = entry
                        .grid
                        .value(i)
                        .iter()
                        .map(|v| Value::String(v.to_string()))
                        .collect();
                    values.insert(point.clone(), Value::Array(row));
                }
                spec.insert("values".into(), Value::Object(values));
                map.insert(name.clone(), Value::Object(spec));
            }
            top.insert("grids".into(), Value::Object(map));
        }
        Value::Object(top)
    }

    pub fn serialize(&self) -> String {
        let mut text = serde_json::to_string_pretty(&self.to_json()).expect("json rendering");
        text.push('\n');
        text
    }
}

fn labels_json(space: &FiniteSpace) -> Value {
    Value::Array(space.points().iter().map(|p| Value::String(p.clone())).collect())
}
