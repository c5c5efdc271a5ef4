use std::ffi::CString;

use pyo3::prelude::*;
use pyo3::types::PyDict;
use pyhquery::pyhquery;

fn run(code: &str) {
    Python::attach(|py| {
        let globals = PyDict::new(py);
        globals.set_item("hq", py.import("pyhquery").unwrap()).unwrap();
        if let Err(e) = py.run(&CString::new(code).unwrap(), Some(&globals), None) {
            e.display(py);
            panic!("python code failed:\n{code}");
        }
    })
}

#[test]
fn bindings() {
    pyo3::append_to_inittab!(pyhquery);
    Python::initialize();

    run(r#"
i = hq.Interpreter()
assert i.eval("a = 2; SELECT this * a FROM [1, 2.5];") == [2, 5.0]
assert i.get("a") == 2 and i.get("missing") is None
i.set_variable("xs", [1, (2, 3), {"k": None}, True])
assert i.eval("xs;") == [1, [2, 3], {"k": None}, True]
assert hq.serialize([1, 2.0, "s", None, True, {"b": 1, "a": []}]) == '[1, 2.0, "s", none, true, {"a": [], "b": 1}]'
assert hq.pretty_print("select this from [1];").startswith("SELECT")
"#);

    run(r#"
i = hq.Interpreter()
i.add_function("triple", lambda x: 3 * x)
i.add_function("total", lambda xs: sum(xs), aggregate=True)
assert i.eval("SELECT triple FROM [1, 2];") == [3, 6]
assert i.eval("total(SELECT this FROM [1, 2, 3]);") == 6
def boom(x):
    raise ValueError("nope")
i.add_function("boom", boom)
try:
    i.eval("boom(1);")
    raise AssertionError("expected failure")
except hq.QueryRuntimeError as e:
    assert "nope" in str(e)
try:
    i.eval("1 +;")
    raise AssertionError("expected failure")
except hq.QuerySyntaxError:
    pass
assert issubclass(hq.QueryRuntimeError, hq.HQueryError)
"#);

    run(r#"
i = hq.Interpreter("hanoi")
i.max_nodes = 200
try:
    i.eval("SELECT this FROM [[0,1],[1,0]] START WITH t = [[1],[],[]] CONNECT BY t = move(this, t) STOP WITH [] == move(this, t);")
    raise AssertionError("expected budget failure")
except hq.QueryRuntimeError as e:
    assert "budget" in str(e)
assert i.stats()["expansions"] > 200

p = hq.Interpreter("particles:7,10")
ents = p.eval("SELECT obj FROM space AS list;")
assert len(ents) == 10 and all(isinstance(e, hq.Entity) for e in ents)
assert ents[0].world == "particles" and ents[0] == ents[0]
p.set_variable("e", ents[3])
assert p.eval("id(e);") == 3
"#);
}
