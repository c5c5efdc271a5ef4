//! An interpreter for a small SQL-flavoured query language with recursive
//! (START WITH / CONNECT BY / STOP WITH) search queries, pluggable host
//! functions and attachable worlds.
//!
//! ```
//! let mut interp = hquery::Interpreter::new();
//! let v = interp.eval("SELECT this * 2 FROM [1, 2, 3] WHERE this > 1;").unwrap();
//! assert_eq!(v.serialize(), "[4, 6]");
//! ```

pub mod compiler;
pub mod error;
pub mod frontend;
pub mod interpreter;
pub mod query;
pub mod recursion;
pub mod value;
pub mod worlds;

pub use compiler::{compile, Program};
pub use error::{Error, EvalError, HostError, Result, RuntimeError};
pub use frontend::{parse_source, pretty_print, Script};
pub use interpreter::{EngineOptions, Interpreter, Stats, DEFAULT_MAX_NODES};
pub use query::ResultTable;
pub use value::{EntityRef, Value};
