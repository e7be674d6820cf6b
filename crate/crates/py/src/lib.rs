//! Python bindings. Matrices cross the boundary as lists of rows of ints,
//! field elements as their integer labels.

use std::collections::BTreeMap;

use agdmm::rr::semigroup;
use agdmm::schemes::{self, SchemeError};
use agdmm::sim::{self, StragglerModel};
use agdmm::{CurveModel, Elem, Field, Matrix, SchemeInstance, SchemeSpec};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

type Rows = Vec<Vec<u32>>;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn scheme_err(e: SchemeError) -> PyErr {
    match e {
        SchemeError::BadSpec(_)
        | SchemeError::InvalidPartition(_)
        | SchemeError::DimensionMismatch(_) => value_err(e),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn elem(field: &Field, v: u32) -> PyResult<Elem> {
    field.elem(v).map_err(value_err)
}

fn to_rows(m: &Matrix) -> Rows {
    (0..m.rows())
        .map(|r| m.row(r).iter().map(|e| e.to_int()).collect())
        .collect()
}

fn from_rows(field: &Field, rows: &Rows) -> PyResult<Matrix> {
    Matrix::from_rows(field, rows).map_err(value_err)
}

/// Finite field GF(q), q a prime power up to 256.
#[pyclass(name = "Field", frozen)]
struct PyField(Field);

#[pymethods]
impl PyField {
    #[new]
    fn new(q: u32) -> PyResult<Self> {
        Field::new(q).map(PyField).map_err(value_err)
    }

    #[getter]
    fn order(&self) -> u32 {
        self.0.order()
    }

    #[getter]
    fn characteristic(&self) -> u32 {
        self.0.characteristic()
    }

    fn add(&self, a: u32, b: u32) -> PyResult<u32> {
        Ok(self.0.add(elem(&self.0, a)?, elem(&self.0, b)?).to_int())
    }

    fn mul(&self, a: u32, b: u32) -> PyResult<u32> {
        Ok(self.0.mul(elem(&self.0, a)?, elem(&self.0, b)?).to_int())
    }

    fn inv(&self, a: u32) -> PyResult<u32> {
        let e = elem(&self.0, a)?;
        self.0
            .checked_inv(e)
            .map(|x| x.to_int())
            .ok_or_else(|| PyValueError::new_err("zero has no inverse"))
    }

    fn pow(&self, a: u32, n: u64) -> PyResult<u32> {
        Ok(self.0.pow(elem(&self.0, a)?, n).to_int())
    }

    fn matmul(&self, a: Rows, b: Rows) -> PyResult<Rows> {
        let (a, b) = (from_rows(&self.0, &a)?, from_rows(&self.0, &b)?);
        a.matmul(&b).map(|m| to_rows(&m)).map_err(value_err)
    }

    fn __repr__(&self) -> String {
        format!("Field({})", self.0.order())
    }
}

/// A supported curve, e.g. `Curve("hermitian:u=2")`.
#[pyclass(name = "Curve", frozen)]
struct PyCurve(CurveModel);

#[pymethods]
impl PyCurve {
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        CurveModel::parse(spec).map(PyCurve).map_err(value_err)
    }

    #[getter]
    fn q(&self) -> u32 {
        self.0.field().order()
    }

    #[getter]
    fn genus(&self) -> u32 {
        self.0.genus()
    }

    /// Rational places as strings, the place at infinity last.
    fn places(&self) -> Vec<String> {
        self.0
            .rational_places()
            .iter()
            .map(ToString::to_string)
            .collect()
    }

    /// Gaps of the Weierstrass semigroup at infinity.
    fn gaps(&self) -> Vec<u32> {
        semigroup(&self.0).gaps.clone()
    }

    fn is_pole_number(&self, k: u32) -> bool {
        self.0.is_pole_number(k)
    }

    fn __repr__(&self) -> String {
        format!("Curve({:?})", self.0.spec_string())
    }
}

/// A built coded matrix multiplication scheme.
#[pyclass(name = "Scheme", frozen)]
struct PyScheme(SchemeInstance);

impl PyScheme {
    fn field(&self) -> &Field {
        self.0.curve().field()
    }

    fn inputs(&self, a: &Rows, b: &Rows) -> PyResult<(Matrix, Matrix)> {
        Ok((from_rows(self.field(), a)?, from_rows(self.field(), b)?))
    }
}

#[pymethods]
impl PyScheme {
    /// Builds from a spec string such as
    /// `kind=ag-c1;curve=hermitian:u=2;t=2;r=2;s=2;m=2;n=2;N=6`.
    #[new]
    fn new(py: Python<'_>, spec: &str) -> PyResult<Self> {
        let spec: SchemeSpec = spec.parse().map_err(scheme_err)?;
        py.detach(|| spec.build()).map(PyScheme).map_err(scheme_err)
    }

    #[getter]
    fn spec(&self) -> String {
        self.0.spec().to_string()
    }

    #[getter]
    fn threshold(&self) -> usize {
        self.0.threshold()
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.0.dimension()
    }

    #[getter]
    fn workers(&self) -> usize {
        self.0.workers()
    }

    #[getter]
    fn genus(&self) -> u32 {
        self.0.curve().genus()
    }

    fn summary(&self) -> String {
        self.0.summary()
    }

    fn eval_places(&self) -> Vec<String> {
        self.0
            .eval_places()
            .iter()
            .map(ToString::to_string)
            .collect()
    }

    /// Seeded random `(A, B)` of the right shapes.
    #[pyo3(signature = (seed=0))]
    fn random_inputs(&self, seed: u64) -> (Rows, Rows) {
        let (a, b) = schemes::random_inputs(&self.0, seed);
        (to_rows(&a), to_rows(&b))
    }

    /// Per-worker `(A_i, B_i)` shares.
    fn encode(&self, a: Rows, b: Rows) -> PyResult<Vec<(Rows, Rows)>> {
        let (a, b) = self.inputs(&a, &b)?;
        let payloads = schemes::encode(&self.0, &a, &b).map_err(scheme_err)?;
        Ok(payloads
            .iter()
            .map(|p| (to_rows(&p.a), to_rows(&p.b)))
            .collect())
    }

    /// Every worker's product `A_i B_i`.
    fn compute_all(&self, py: Python<'_>, a: Rows, b: Rows) -> PyResult<Vec<Rows>> {
        let (a, b) = self.inputs(&a, &b)?;
        let out = py
            .detach(|| sim::compute_all(&self.0, &a, &b))
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        Ok(out.iter().map(to_rows).collect())
    }

    /// Recovers `AB` from a `{worker: result}` dict with at least `threshold` entries.
    fn decode(&self, results: BTreeMap<usize, Rows>) -> PyResult<Rows> {
        let results = results
            .into_iter()
            .map(|(w, m)| Ok((w, from_rows(self.field(), &m)?)))
            .collect::<PyResult<BTreeMap<_, _>>>()?;
        schemes::decode(&self.0, &results)
            .map(|m| to_rows(&m))
            .map_err(scheme_err)
    }

    /// One straggler round; returns the run record as JSON.
    #[pyo3(signature = (model="none", seed=0, input_seed=0))]
    fn run(&self, py: Python<'_>, model: &str, seed: u64, input_seed: u64) -> PyResult<String> {
        let model = StragglerModel::parse(model).map_err(value_err)?;
        let (a, b) = schemes::random_inputs(&self.0, input_seed);
        py.detach(|| sim::run_round(&self.0, &a, &b, &model, seed).and_then(|r| r.to_json()))
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    /// `(k, subsets_tested, successes, fraction)` for every size from K to N.
    #[pyo3(signature = (trials=200, seed=0, input_seed=0))]
    fn sweep(
        &self,
        py: Python<'_>,
        trials: usize,
        seed: u64,
        input_seed: u64,
    ) -> PyResult<Vec<(usize, u64, u64, f64)>> {
        let (a, b) = schemes::random_inputs(&self.0, input_seed);
        let rows = py
            .detach(|| sim::threshold_sweep(&self.0, &a, &b, trials, seed))
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        Ok(rows
            .iter()
            .map(|r| (r.k, r.subsets_tested, r.successes, r.fraction))
            .collect())
    }

    fn __repr__(&self) -> String {
        format!("Scheme({:?})", self.spec())
    }
}

/// Closed-form recovery threshold for a spec, without building it.
#[pyfunction]
fn threshold(spec: &str) -> PyResult<usize> {
    let spec: SchemeSpec = spec.parse().map_err(scheme_err)?;
    let curve = CurveModel::parse(&spec.curve).map_err(value_err)?;
    schemes::closed_form_threshold(spec.kind, &curve, spec.partition).map_err(scheme_err)
}

#[pymodule]
#[pyo3(name = "agdmm")]
fn agdmm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyField>()?;
    m.add_class::<PyCurve>()?;
    m.add_class::<PyScheme>()?;
    m.add_function(wrap_pyfunction!(threshold, m)?)?;
    Ok(())
}
