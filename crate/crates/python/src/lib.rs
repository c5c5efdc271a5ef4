//! Python bindings: an `Interpreter` class plus value helpers.
//!
//! Values map onto Python as none/bool/int/float/str/list/dict; entity
//! handles become `Entity` objects.

use std::collections::BTreeMap;

use hquery::worlds::WorldSpec;
use hquery::{EntityRef, Error, HostError, Value};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyTypeError};
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict, PyFloat, PyInt, PyList, PyString, PyTuple};
use pyo3::IntoPyObjectExt;

create_exception!(pyhquery, HQueryError, PyException, "Base class of interpreter errors.");
create_exception!(pyhquery, QuerySyntaxError, HQueryError, "Lex, parse or compile failure.");
create_exception!(pyhquery, QueryRuntimeError, HQueryError, "Evaluation failure.");

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Runtime(_) => QueryRuntimeError::new_err(e.to_string()),
        Error::Syntax(_) | Error::Compile(_) => QuerySyntaxError::new_err(e.to_string()),
        _ => HQueryError::new_err(e.to_string()),
    }
}

/// Opaque handle to a world entity.
#[pyclass(frozen, eq, hash, skip_from_py_object, module = "pyhquery")]
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Entity {
    #[pyo3(get)]
    world: String,
    #[pyo3(get)]
    handle: u64,
}

#[pymethods]
impl Entity {
    fn __repr__(&self) -> String {
        format!("<entity {}#{}>", self.world, self.handle)
    }
}

pub fn to_value(obj: &Bound<'_, PyAny>) -> PyResult<Value> {
    if obj.is_none() {
        return Ok(Value::None);
    }
    if let Ok(b) = obj.cast::<PyBool>() {
        return Ok(Value::Bool(b.is_true()));
    }
    if obj.is_instance_of::<PyInt>() {
        return Ok(Value::Int(obj.extract()?));
    }
    if obj.is_instance_of::<PyFloat>() {
        return Ok(Value::Float(obj.extract()?));
    }
    if let Ok(s) = obj.cast::<PyString>() {
        return Ok(Value::Str(s.to_str()?.to_string()));
    }
    if let Ok(e) = obj.cast::<Entity>() {
        let e = e.get();
        return Ok(Value::Entity(EntityRef::new(e.world.as_str(), e.handle)));
    }
    if let Ok(l) = obj.cast::<PyList>() {
        return l.iter().map(|x| to_value(&x)).collect::<PyResult<_>>().map(Value::List);
    }
    if let Ok(t) = obj.cast::<PyTuple>() {
        return t.iter().map(|x| to_value(&x)).collect::<PyResult<_>>().map(Value::List);
    }
    if let Ok(d) = obj.cast::<PyDict>() {
        let mut out = BTreeMap::new();
        for (k, v) in d.iter() {
            let k: String = k.extract().map_err(|_| PyTypeError::new_err("dict keys must be strings"))?;
            out.insert(k, to_value(&v)?);
        }
        return Ok(Value::Dict(out));
    }
    Err(PyTypeError::new_err(format!(
        "cannot convert {} to a query value",
        obj.get_type().name()?
    )))
}

pub fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    match v {
        Value::None => Ok(py.None().into_bound(py)),
        Value::Bool(b) => b.into_bound_py_any(py),
        Value::Int(i) => i.into_bound_py_any(py),
        Value::Float(x) => x.into_bound_py_any(py),
        Value::Str(s) => s.into_bound_py_any(py),
        Value::List(items) => {
            let items = items.iter().map(|x| to_py(py, x)).collect::<PyResult<Vec<_>>>()?;
            Ok(PyList::new(py, items)?.into_any())
        }
        Value::Dict(d) => {
            let out = PyDict::new(py);
            for (k, x) in d {
                out.set_item(k, to_py(py, x)?)?;
            }
            Ok(out.into_any())
        }
        Value::Entity(e) => Entity {
            world: e.world.to_string(),
            handle: e.handle,
        }
        .into_bound_py_any(py),
    }
}

/// A persistent interpreter session.
#[pyclass(unsendable, module = "pyhquery")]
pub struct Interpreter {
    inner: hquery::Interpreter,
}

#[pymethods]
impl Interpreter {
    /// `world` takes the same specs as the command line: none, hanoi,
    /// gridworld:<map>, particles:<seed>,<n>.
    #[new]
    #[pyo3(signature = (world = None))]
    fn new(world: Option<&str>) -> PyResult<Self> {
        let mut interp = Interpreter {
            inner: hquery::Interpreter::new(),
        };
        if let Some(spec) = world {
            interp.attach_world(spec)?;
        }
        Ok(interp)
    }

    fn attach_world(&mut self, spec: &str) -> PyResult<()> {
        let spec: WorldSpec = spec.parse().map_err(|e| HQueryError::new_err(format!("{e}")))?;
        spec.attach(&mut self.inner).map_err(|e| HQueryError::new_err(format!("{e}")))
    }

    /// Evaluates a script; returns the value of its last statement.
    fn eval<'py>(&mut self, py: Python<'py>, source: &str) -> PyResult<Bound<'py, PyAny>> {
        let v = self.inner.eval(source).map_err(py_err)?;
        to_py(py, &v)
    }

    /// Registers a Python callable as a query function. Exceptions raised by
    /// the callable surface as `QueryRuntimeError`.
    #[pyo3(signature = (name, func, aggregate = false))]
    fn add_function(&mut self, name: &str, func: Py<PyAny>, aggregate: bool) -> PyResult<()> {
        self.inner
            .add_function(name, aggregate, move |args| {
                Python::attach(|py| {
                    let args = args.iter().map(|a| to_py(py, a)).collect::<PyResult<Vec<_>>>()?;
                    let out = func.bind(py).call1(PyTuple::new(py, args)?)?;
                    to_value(&out)
                })
                .map_err(|e: PyErr| HostError::new(e.to_string()))
            })
            .map_err(py_err)
    }

    fn set_variable(&mut self, name: &str, value: &Bound<'_, PyAny>) -> PyResult<()> {
        self.inner.set_variable(name, to_value(value)?);
        Ok(())
    }

    /// The variable's value, or None if unbound.
    fn get<'py>(&self, py: Python<'py>, name: &str) -> PyResult<Bound<'py, PyAny>> {
        match self.inner.variable(name) {
            Some(v) => to_py(py, v),
            None => Ok(py.None().into_bound(py)),
        }
    }

    #[getter]
    fn max_nodes(&self) -> u64 {
        self.inner.options().max_nodes
    }

    #[setter]
    fn set_max_nodes(&mut self, n: u64) {
        self.inner.options_mut().max_nodes = n;
    }

    #[getter]
    fn state_keys(&self) -> Option<Vec<String>> {
        self.inner.options().state_keys.clone()
    }

    #[setter]
    fn set_state_keys(&mut self, keys: Option<Vec<String>>) {
        self.inner.options_mut().state_keys = keys;
    }

    /// Cumulative counters: {"expansions": ..., "rows": ...}.
    fn stats<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let s = self.inner.stats();
        let d = PyDict::new(py);
        d.set_item("expansions", s.expansions)?;
        d.set_item("rows", s.rows)?;
        Ok(d)
    }
}

/// Canonical text form of a value, as printed by the command line.
#[pyfunction]
fn serialize(value: &Bound<'_, PyAny>) -> PyResult<String> {
    Ok(to_value(value)?.serialize())
}

/// Parses a script and prints it back in canonical layout.
#[pyfunction]
fn pretty_print(source: &str) -> PyResult<String> {
    let script = hquery::parse_source(source).map_err(|e| QuerySyntaxError::new_err(e.to_string()))?;
    Ok(hquery::pretty_print(&script))
}

#[pymodule]
pub mod pyhquery {
    #[pymodule_export]
    use super::{pretty_print, serialize, Entity, HQueryError, Interpreter, QueryRuntimeError, QuerySyntaxError};
}
