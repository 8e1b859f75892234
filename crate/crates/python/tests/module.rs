use pyo3::prelude::*;
use pyo3::types::PyDict;

fn with_module<F: FnOnce(Python<'_>, &Bound<'_, PyModule>)>(f: F) {
    Python::attach(|py| {
        let m = PyModule::new(py, "hip").unwrap();
        hip::hip(&m).unwrap();
        f(py, &m);
    });
}

#[test]
fn reconstruction_terminates() {
    with_module(|py, m| {
        let res = m.getattr("reconstruct").unwrap().call1((7u64,)).unwrap();
        let d = res.cast::<PyDict>().unwrap();
        let terminated: bool = d.get_item("terminated").unwrap().unwrap().extract().unwrap();
        assert!(terminated);
        let chi: Vec<Vec<f64>> = d.get_item("chi").unwrap().unwrap().extract().unwrap();
        assert!(chi.iter().all(|h| h.len() == 3 && h[2].abs() <= 1.0));
        let _ = py;
    });
}

#[test]
fn points_of_three_lines() {
    with_module(|_, m| {
        let s = 0.5f64.sqrt();
        let rows = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![s, s, s]];
        let pts: Vec<Vec<f64>> = m.getattr("intersection_points").unwrap().call1((rows, 2.0)).unwrap().extract().unwrap();
        assert_eq!(pts.len(), 3);
    });
}

#[test]
fn invalid_arguments_raise() {
    with_module(|py, m| {
        let err = m.getattr("sample_hyperplanes").unwrap().call1((-1.0, 0u64)).unwrap_err();
        assert!(err.is_instance_of::<pyo3::exceptions::PyValueError>(py));
    });
}
