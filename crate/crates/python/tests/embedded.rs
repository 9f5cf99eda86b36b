//! Runs `python/smoke_test.py` against the module registered as a built-in of
//! an embedded interpreter, so `cargo test` covers the bindings.

use std::ffi::CString;

use authortopic_py::authortopic_py;
use pyo3::prelude::*;
use pyo3::types::PyDict;

#[test]
fn python_smoke_test() {
    pyo3::append_to_inittab!(authortopic_py);
    Python::initialize();
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/python/smoke_test.py");
    let script = CString::new(std::fs::read_to_string(path).unwrap()).unwrap();
    Python::attach(|py| {
        let globals = PyDict::new(py);
        globals.set_item("__name__", "__main__").unwrap();
        globals.set_item("__file__", path).unwrap();
        if let Err(e) = py.run(&script, Some(&globals), None) {
            e.print(py);
            panic!("smoke test failed: {e}");
        }
    });
}
