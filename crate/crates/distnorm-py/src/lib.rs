//! Python bindings: the main operator/POVM/design types plus the exact
//! constants and seeded Monte-Carlo audits.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use distnorm::bipartite::{chain_report, hiding_pair, ppt_norm_uu_invariant, UUInvariantOp};
use distnorm::designs as ds;
use distnorm::info::{self, EntropyOrder};
use distnorm::op::{self, CMat, C64};
use distnorm::rng::RngStream;
use distnorm::uniform;

fn err(e: distnorm::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A dense Hermitian operator with optional bipartite shape.
#[pyclass(name = "HermitianOp", from_py_object)]
#[derive(Clone)]
struct PyHermitianOp {
    inner: op::HermitianOp,
}

#[pymethods]
impl PyHermitianOp {
    /// Build from row-major `[(re, im), ...]` entries.
    #[new]
    #[pyo3(signature = (dim, entries, shape=None))]
    fn new(dim: usize, entries: Vec<(f64, f64)>, shape: Option<(usize, usize)>) -> PyResult<Self> {
        if entries.len() != dim * dim {
            return Err(PyValueError::new_err(format!(
                "expected {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        let mut mat = CMat::zeros(dim, dim);
        for (k, (re, im)) in entries.iter().enumerate() {
            mat[(k / dim, k % dim)] = C64::new(*re, *im);
        }
        Ok(Self {
            inner: op::HermitianOp::new(mat, shape).map_err(err)?,
        })
    }

    /// Real diagonal operator.
    #[staticmethod]
    fn diagonal(values: Vec<f64>) -> Self {
        Self {
            inner: op::HermitianOp::from_diagonal(&values),
        }
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn shape(&self) -> Option<(usize, usize)> {
        self.inner.shape()
    }

    fn with_shape(&self, shape: Option<(usize, usize)>) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.with_shape(shape).map_err(err)?,
        })
    }

    fn trace(&self) -> f64 {
        self.inner.trace()
    }

    fn trace_norm(&self) -> f64 {
        self.inner.trace_norm()
    }

    fn hs_norm(&self) -> f64 {
        self.inner.hs_norm()
    }

    fn eigenvalues(&self) -> Vec<f64> {
        self.inner.spectrum().eigenvalues
    }

    fn entries(&self) -> Vec<(f64, f64)> {
        let d = self.inner.dim();
        let mut out = Vec::with_capacity(d * d);
        for r in 0..d {
            for c in 0..d {
                let v = self.inner.matrix()[(r, c)];
                out.push((v.re, v.im));
            }
        }
        out
    }

    fn partial_trace(&self, keep: &str) -> PyResult<Self> {
        let side = match keep {
            "A" | "a" => op::Party::A,
            "B" | "b" => op::Party::B,
            other => {
                return Err(PyValueError::new_err(format!(
                    "keep must be 'A' or 'B', got {other:?}"
                )))
            }
        };
        Ok(Self {
            inner: self.inner.partial_trace(side).map_err(err)?,
        })
    }

    fn partial_transpose(&self) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.partial_transpose().map_err(err)?,
        })
    }

    fn tensor(&self, other: &Self) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.tensor(&other.inner).map_err(err)?,
        })
    }

    fn add(&self, other: &Self) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.add(&other.inner).map_err(err)?,
        })
    }

    fn scale(&self, factor: f64) -> Self {
        Self {
            inner: self.inner.scale(factor),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "HermitianOp(dim={}, shape={:?})",
            self.inner.dim(),
            self.inner.shape()
        )
    }
}

/// A validated POVM.
#[pyclass(name = "Povm")]
struct PyPovm {
    inner: distnorm::Povm,
}

#[pymethods]
impl PyPovm {
    #[new]
    fn new(effects: Vec<PyHermitianOp>) -> PyResult<Self> {
        Ok(Self {
            inner: distnorm::Povm::new(effects.into_iter().map(|e| e.inner).collect())
                .map_err(err)?,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// Outcome functionals `tr(H M_k)`.
    fn apply(&self, h: &PyHermitianOp) -> PyResult<Vec<f64>> {
        self.inner.apply(&h.inner).map_err(err)
    }

    fn bias(&self, rho: &PyHermitianOp, sigma: &PyHermitianOp) -> PyResult<f64> {
        self.inner.bias(&rho.inner, &sigma.inner).map_err(err)
    }

    fn l1_of_image(&self, xi: &PyHermitianOp) -> PyResult<f64> {
        self.inner.l1_of_image(&xi.inner).map_err(err)
    }
}

/// A weighted spherical t-design.
#[pyclass(name = "WeightedDesign")]
struct PyDesign {
    inner: ds::WeightedDesign,
}

#[pymethods]
impl PyDesign {
    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn proper(&self) -> bool {
        self.inner.proper()
    }

    fn defect(&self, t: usize) -> PyResult<f64> {
        ds::design_defect(&self.inner, t).map_err(err)
    }

    fn povm(&self) -> PyResult<PyPovm> {
        Ok(PyPovm {
            inner: ds::design_povm(&self.inner).map_err(err)?,
        })
    }

    /// `||M(rho_i) - M(rho_j)||_1` for two design vectors by index.
    fn pair_distance(&self, i: usize, j: usize) -> PyResult<f64> {
        let items = self.inner.items();
        if i >= items.len() || j >= items.len() {
            return Err(PyValueError::new_err("index out of range"));
        }
        Ok(ds::measured_distance(
            &self.inner,
            &items[i].vector,
            &items[j].vector,
        ))
    }
}

/// The complete MUB set for a prime dimension.
#[pyfunction]
fn mub_design(d: usize) -> PyResult<PyDesign> {
    Ok(PyDesign {
        inner: ds::mub_design(d).map_err(err)?,
    })
}

/// The qubit SIC tetrahedron as a design.
#[pyfunction]
fn sic_tetrahedron() -> PyResult<PyDesign> {
    let items = ds::qubit_sic_tetrahedron()
        .into_iter()
        .map(|v| (0.25, v))
        .collect();
    Ok(PyDesign {
        inner: ds::WeightedDesign::from_vectors(items, 2).map_err(err)?,
    })
}

/// Exact lower domination constant of the uniform POVM with its
/// minimizing rank split.
#[pyfunction]
fn lambda_uniform(d: usize) -> PyResult<(f64, (usize, usize))> {
    let (value, split) = uniform::lambda_uniform(d).map_err(err)?;
    Ok((value, (split.a(), split.b())))
}

#[pyfunction]
fn lambda_uniform_even_form(d: usize) -> PyResult<f64> {
    uniform::lambda_uniform_even_form(d).map_err(err)
}

#[pyfunction]
fn split_bias_closed_form(a: usize, b: usize) -> PyResult<f64> {
    Ok(uniform::split_bias_closed_form(
        uniform::RankSplit::new(a, b).map_err(err)?,
    ))
}

#[pyfunction]
fn binomial_partial_sum(k: usize) -> f64 {
    uniform::binomial_partial_sum(k)
}

/// Monte-Carlo uniform-POVM bias of an operator: `(mean, std_error)`.
#[pyfunction]
fn mc_uniform_bias(xi: &PyHermitianOp, samples: usize, seed: u64) -> PyResult<(f64, f64)> {
    let mut rng = RngStream::from_seed(seed);
    let est = uniform::mc_uniform_bias(&xi.inner, samples, &mut rng).map_err(err)?;
    Ok((est.mean, est.std_error))
}

/// Helstrom bias `||rho - sigma||_1 / 2`.
#[pyfunction]
fn helstrom_bias(rho: &PyHermitianOp, sigma: &PyHermitianOp) -> PyResult<f64> {
    Ok(op::helstrom_bias(&rho.inner, &sigma.inner).map_err(err)?.0)
}

/// Exact PPT bias of the hiding pair in local dimension `d`.
#[pyfunction]
fn hiding_ppt_bias(d: usize) -> PyResult<f64> {
    let xi = hiding_pair(d).map_err(err)?.direction();
    let invariant = UUInvariantOp::from_operator(&xi).map_err(err)?;
    Ok(ppt_norm_uu_invariant(&invariant).map_err(err)?.value)
}

/// The locality chain on the hiding direction as a list of dicts.
#[pyfunction]
fn chain(py: Python<'_>, d: usize, samples: usize, seed: u64) -> PyResult<Py<PyList>> {
    let mut rng = RngStream::from_seed(seed);
    let report = chain_report(d, samples, &mut rng).map_err(err)?;
    let out = PyList::empty(py);
    for entry in report.entries {
        let item = PyDict::new(py);
        item.set_item("bound_name", entry.bound_name)?;
        item.set_item("value", entry.value)?;
        item.set_item("provenance", entry.provenance.as_str())?;
        item.set_item("std_error", entry.std_error)?;
        out.append(item)?;
    }
    Ok(out.unbind())
}

/// Number of R-conjugacy classes and their total membership.
#[pyfunction]
fn perm_class_census() -> (usize, usize) {
    let classes = distnorm::perm::r_conjugacy_classes();
    let total = classes.iter().map(|c| c.size()).sum();
    (classes.len(), total)
}

/// Shannon or collision entropy (order 2) of a distribution, in bits.
#[pyfunction]
fn entropy(dist: Vec<f64>, order: &str) -> PyResult<f64> {
    let order = match order {
        "shannon" => EntropyOrder::Shannon,
        "renyi2" => EntropyOrder::Renyi2,
        other => {
            return Err(PyValueError::new_err(format!(
                "order must be 'shannon' or 'renyi2', got {other:?}"
            )))
        }
    };
    info::entropy(&dist, order).map_err(err)
}

#[pymodule]
fn distnorm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyHermitianOp>()?;
    m.add_class::<PyPovm>()?;
    m.add_class::<PyDesign>()?;
    m.add_function(wrap_pyfunction!(mub_design, m)?)?;
    m.add_function(wrap_pyfunction!(sic_tetrahedron, m)?)?;
    m.add_function(wrap_pyfunction!(lambda_uniform, m)?)?;
    m.add_function(wrap_pyfunction!(lambda_uniform_even_form, m)?)?;
    m.add_function(wrap_pyfunction!(split_bias_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(binomial_partial_sum, m)?)?;
    m.add_function(wrap_pyfunction!(mc_uniform_bias, m)?)?;
    m.add_function(wrap_pyfunction!(helstrom_bias, m)?)?;
    m.add_function(wrap_pyfunction!(hiding_ppt_bias, m)?)?;
    m.add_function(wrap_pyfunction!(chain, m)?)?;
    m.add_function(wrap_pyfunction!(perm_class_census, m)?)?;
    m.add_function(wrap_pyfunction!(entropy, m)?)?;
    Ok(())
}
