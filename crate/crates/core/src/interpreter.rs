//! Script evaluation: the environment, the host-function registry and the
//! expression evaluator.

use std::cell::Cell;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use crate::compiler::{self, apply_binary, apply_unary, Interner, Ir, IrStmt, Program, SearchMode, Symbol};
use crate::error::{Error, EvalError, HostError, RuntimeError};
use crate::frontend::{self, BinOp, Position};
use crate::query::{self, ResultTable};
use crate::recursion::{self, StateGraph};
use crate::value::Value;

pub type HostFn = Arc<dyn Fn(&[Value]) -> Result<Value, HostError> + Send + Sync>;
pub type FormatterFn = Arc<dyn Fn(&ResultTable, &[Value]) -> Result<Value, HostError> + Send + Sync>;
/// Enumerates the entities behind a world handle; `None` if the handle is not a root.
pub type EntitySourceFn = Arc<dyn Fn(u64) -> Option<Vec<Value>> + Send + Sync>;

pub const DEFAULT_MAX_NODES: u64 = 10_000_000;

#[derive(Clone)]
pub struct FunctionEntry {
    pub callable: HostFn,
    pub aggregate: bool,
}

impl fmt::Debug for FunctionEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionEntry")
            .field("aggregate", &self.aggregate)
            .finish_non_exhaustive()
    }
}

#[derive(Clone, Default)]
pub struct Registry {
    functions: HashMap<String, FunctionEntry>,
    formatters: HashMap<String, FormatterFn>,
    worlds: HashMap<String, EntitySourceFn>,
}

impl Registry {
    pub fn with_builtins() -> Self {
        let mut reg = Registry::default();
        reg.insert("count", true, builtin_count);
        reg.insert("sum", true, builtin_sum);
        reg.insert("min", true, |args| Ok(extreme(args, std::cmp::Ordering::Less)));
        reg.insert("max", true, |args| Ok(extreme(args, std::cmp::Ordering::Greater)));
        reg.insert("avg", true, builtin_avg);
        reg.insert("print", false, builtin_print);
        reg
    }

    fn insert<F>(&mut self, name: &str, aggregate: bool, f: F)
    where
        F: Fn(&[Value]) -> Result<Value, HostError> + Send + Sync + 'static,
    {
        self.functions.insert(
            name.to_string(),
            FunctionEntry {
                callable: Arc::new(f),
                aggregate,
            },
        );
    }

    pub fn function(&self, name: &str) -> Option<&FunctionEntry> {
        self.functions.get(name)
    }

    pub fn formatter(&self, name: &str) -> Option<&FormatterFn> {
        self.formatters.get(name)
    }

    pub fn entity_source(&self, world: &str) -> Option<&EntitySourceFn> {
        self.worlds.get(world)
    }

    pub fn function_names(&self) -> impl Iterator<Item = &str> {
        self.functions.keys().map(String::as_str)
    }
}

fn elements(args: &[Value]) -> Vec<Value> {
    match args {
        [Value::List(items)] => items.clone(),
        _ => args.to_vec(),
    }
}

fn builtin_count(args: &[Value]) -> Result<Value, HostError> {
    let n = match args {
        [Value::List(items)] => items.len(),
        [Value::Dict(map)] => map.len(),
        [Value::None] => 0,
        _ => args.len(),
    };
    Ok(Value::Int(n as i64))
}

fn builtin_sum(args: &[Value]) -> Result<Value, HostError> {
    elements(args)
        .iter()
        .try_fold(Value::Int(0), |acc, v| acc.add(v))
        .map_err(|e| HostError::new(e.to_string()))
}

fn builtin_avg(args: &[Value]) -> Result<Value, HostError> {
    let items = elements(args);
    if items.is_empty() {
        return Ok(Value::None);
    }
    let total = builtin_sum(&[Value::List(items.clone())])?;
    let total = total
        .as_f64()
        .ok_or_else(|| HostError::new("avg expects numbers"))?;
    Ok(Value::Float(total / items.len() as f64))
}

fn extreme(args: &[Value], want: std::cmp::Ordering) -> Value {
    elements(args)
        .into_iter()
        .reduce(|best, v| if v.sort_cmp(&best) == want { v } else { best })
        .unwrap_or(Value::None)
}

fn builtin_print(args: &[Value]) -> Result<Value, HostError> {
    let text: Vec<String> = args.iter().map(Value::serialize).collect();
    println!("{}", text.join(" "));
    Ok(match args {
        [single] => single.clone(),
        [] => Value::None,
        _ => Value::List(args.to_vec()),
    })
}

/// Monotonic time source, injectable for tests.
pub trait Clock: Send + Sync {
    fn now(&self) -> Duration;
}

pub struct SystemClock(Instant);

impl Default for SystemClock {
    fn default() -> Self {
        SystemClock(Instant::now())
    }
}

impl Clock for SystemClock {
    fn now(&self) -> Duration {
        self.0.elapsed()
    }
}

/// Clock that only moves when told to.
#[derive(Default)]
pub struct ManualClock(Mutex<Duration>);

impl ManualClock {
    pub fn advance(&self, by: Duration) {
        *self.0.lock().unwrap() += by;
    }
}

impl Clock for ManualClock {
    fn now(&self) -> Duration {
        *self.0.lock().unwrap()
    }
}

pub struct Environment {
    variables: HashMap<String, Value>,
    expiry: HashMap<String, Duration>,
    clock: Arc<dyn Clock>,
}

impl Default for Environment {
    fn default() -> Self {
        Self::with_clock(Arc::new(SystemClock::default()))
    }
}

impl Environment {
    pub fn with_clock(clock: Arc<dyn Clock>) -> Self {
        Self {
            variables: HashMap::new(),
            expiry: HashMap::new(),
            clock,
        }
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.variables.get(name)
    }

    pub fn set(&mut self, name: impl Into<String>, value: Value) {
        let name = name.into();
        self.expiry.remove(&name);
        self.variables.insert(name, value);
    }

    /// Cached value of a temporal variable, if its entry has not expired.
    pub fn fresh(&self, name: &str) -> Option<&Value> {
        let expiry = self.expiry.get(name)?;
        if *expiry > self.clock.now() {
            self.variables.get(name)
        } else {
            None
        }
    }

    pub fn set_temporal(&mut self, name: impl Into<String>, value: Value, ttl: Duration) {
        let name = name.into();
        self.expiry.insert(name.clone(), self.clock.now() + ttl);
        self.variables.insert(name, value);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.variables.keys().map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EngineOptions {
    /// Upper bound on search-node expansions per hierarchical query.
    pub max_nodes: u64,
    /// Explicit state-key variables; overrides the counter heuristic.
    pub state_keys: Option<Vec<String>>,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self {
            max_nodes: DEFAULT_MAX_NODES,
            state_keys: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    /// Search nodes expanded by hierarchical queries.
    pub expansions: u64,
    /// FROM rows evaluated by flat queries.
    pub rows: u64,
}

/// Bindings visible while evaluating an expression. Contexts chain to the
/// enclosing query so nested queries can see outer rows.
#[derive(Debug, Default)]
pub struct EvalContext<'p> {
    pub this: Vec<(Option<Symbol>, Value)>,
    pub recursion: &'p [(Symbol, Value)],
    pub parent: Option<&'p EvalContext<'p>>,
}

impl<'p> EvalContext<'p> {
    pub fn root() -> Self {
        Self::default()
    }

    pub fn child(
        parent: &'p EvalContext<'p>,
        this: Vec<(Option<Symbol>, Value)>,
        recursion: &'p [(Symbol, Value)],
    ) -> Self {
        Self {
            this,
            recursion,
            parent: Some(parent),
        }
    }

    fn lookup(&self, sym: Symbol) -> Option<&Value> {
        let mut ctx = Some(self);
        while let Some(c) = ctx {
            if let Some((_, v)) = c.this.iter().find(|(name, _)| *name == Some(sym)) {
                return Some(v);
            }
            if let Some((_, v)) = c.recursion.iter().find(|(name, _)| *name == sym) {
                return Some(v);
            }
            ctx = c.parent;
        }
        None
    }

    /// The current row: a single element, or a list when several sources are bound.
    pub fn this_value(&self) -> Option<Value> {
        let mut ctx = Some(self);
        while let Some(c) = ctx {
            match c.this.as_slice() {
                [] => ctx = c.parent,
                [(_, v)] => return Some(v.clone()),
                many => return Some(Value::List(many.iter().map(|(_, v)| v.clone()).collect())),
            }
        }
        None
    }

    fn named_this(&self, sym: Symbol) -> Option<&Value> {
        let mut ctx = Some(self);
        while let Some(c) = ctx {
            if let Some((_, v)) = c.this.iter().find(|(name, _)| *name == Some(sym)) {
                return Some(v);
            }
            ctx = c.parent;
        }
        None
    }
}

pub struct Interpreter {
    registry: Registry,
    env: Environment,
    options: EngineOptions,
    stats: Cell<Stats>,
}

impl Default for Interpreter {
    fn default() -> Self {
        Self::new()
    }
}

impl Interpreter {
    pub fn new() -> Self {
        Self {
            registry: Registry::with_builtins(),
            env: Environment::default(),
            options: EngineOptions::default(),
            stats: Cell::new(Stats::default()),
        }
    }

    pub fn with_clock(clock: Arc<dyn Clock>) -> Self {
        Self {
            env: Environment::with_clock(clock),
            ..Self::new()
        }
    }

    /// Registers a host function. Re-registering a name replaces it.
    pub fn add_function<F>(&mut self, name: &str, aggregate: bool, f: F) -> Result<(), Error>
    where
        F: Fn(&[Value]) -> Result<Value, HostError> + Send + Sync + 'static,
    {
        self.add_host_fn(name, aggregate, Arc::new(f))
    }

    pub fn add_host_fn(&mut self, name: &str, aggregate: bool, f: HostFn) -> Result<(), Error> {
        validate_name(name)?;
        self.registry.functions.insert(
            name.to_string(),
            FunctionEntry {
                callable: f,
                aggregate,
            },
        );
        Ok(())
    }

    pub fn add_formatter<F>(&mut self, name: &str, f: F) -> Result<(), Error>
    where
        F: Fn(&ResultTable, &[Value]) -> Result<Value, HostError> + Send + Sync + 'static,
    {
        validate_name(name)?;
        self.registry.formatters.insert(name.to_string(), Arc::new(f));
        Ok(())
    }

    pub fn add_entity_source<F>(&mut self, world: &str, f: F)
    where
        F: Fn(u64) -> Option<Vec<Value>> + Send + Sync + 'static,
    {
        self.registry.worlds.insert(world.to_string(), Arc::new(f));
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn env(&self) -> &Environment {
        &self.env
    }

    pub fn set_variable(&mut self, name: &str, value: Value) {
        self.env.set(name, value);
    }

    pub fn variable(&self, name: &str) -> Option<&Value> {
        self.env.get(name)
    }

    pub fn options(&self) -> &EngineOptions {
        &self.options
    }

    pub fn options_mut(&mut self) -> &mut EngineOptions {
        &mut self.options
    }

    pub fn stats(&self) -> Stats {
        self.stats.get()
    }

    pub fn reset_stats(&self) {
        self.stats.set(Stats::default());
    }

    pub(crate) fn bump_expansions(&self) -> u64 {
        let mut s = self.stats.get();
        s.expansions += 1;
        self.stats.set(s);
        s.expansions
    }

    pub(crate) fn bump_rows(&self, n: u64) {
        let mut s = self.stats.get();
        s.rows += n;
        self.stats.set(s);
    }

    /// Parses, compiles and evaluates a script.
    pub fn eval(&mut self, source: &str) -> Result<Value, Error> {
        let script = frontend::parse_source(source)?;
        let program = compiler::compile(&script)?;
        Ok(self.eval_script(&program)?)
    }

    /// Runs every statement but the last, which must be a MEMORIZE query, and
    /// returns that query's state graph instead of its paths.
    pub fn state_graph(&mut self, source: &str) -> Result<StateGraph, Error> {
        let script = frontend::parse_source(source)?;
        let mut program = compiler::compile(&script)?;
        let last = program.statements.pop();
        let position = program.positions.get(program.statements.len()).copied().unwrap_or_default();
        self.eval_script(&program)?;
        let Some(IrStmt::Expr(Ir::Query(q))) = last else {
            return Err(Error::NotMemorize);
        };
        let Some(h) = &q.hierarchy else {
            return Err(Error::NotMemorize);
        };
        let SearchMode::Memorize(max_len) = h.strategy.mode else {
            return Err(Error::NotMemorize);
        };
        let ev = Evaluator {
            interp: self,
            syms: &program.symbols,
        };
        recursion::build_state_graph(&ev, &q, h, &EvalContext::root(), max_len as usize).map_err(|source| {
            Error::Runtime(RuntimeError {
                statement: program.statements.len(),
                position,
                source,
            })
        })
    }

    /// Evaluates statements in order; the last statement's value is the result.
    pub fn eval_script(&mut self, program: &Program) -> Result<Value, RuntimeError> {
        let mut last = Value::None;
        for (index, stmt) in program.statements.iter().enumerate() {
            let wrap = |source| RuntimeError {
                statement: index,
                position: program.positions.get(index).copied().unwrap_or(Position::default()),
                source,
            };
            last = match stmt {
                IrStmt::Expr(e) => self
                    .eval_expr(e, &program.symbols, &EvalContext::root())
                    .map_err(wrap)?,
                IrStmt::Assign { name, ttl, value } => {
                    let name = program.symbols.name(*name);
                    match ttl {
                        Some(secs) => {
                            if let Some(v) = self.env.fresh(name) {
                                v.clone()
                            } else {
                                let v = self
                                    .eval_expr(value, &program.symbols, &EvalContext::root())
                                    .map_err(wrap)?;
                                let ttl = Duration::try_from_secs_f64(secs.max(0.0))
                                    .unwrap_or(Duration::MAX);
                                self.env.set_temporal(name, v.clone(), ttl);
                                v
                            }
                        }
                        None => {
                            let v = self
                                .eval_expr(value, &program.symbols, &EvalContext::root())
                                .map_err(wrap)?;
                            self.env.set(name, v.clone());
                            v
                        }
                    }
                }
            };
        }
        Ok(last)
    }

    pub fn eval_expr(&self, ir: &Ir, syms: &Interner, ctx: &EvalContext<'_>) -> Result<Value, EvalError> {
        Evaluator { interp: self, syms }.eval(ir, ctx)
    }
}

fn validate_name(name: &str) -> Result<(), Error> {
    let mut chars = name.chars();
    let valid = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !frontend::is_reserved(name);
    if valid {
        Ok(())
    } else {
        Err(Error::InvalidName(name.to_string()))
    }
}

/// Borrowed view used while walking IR.
#[derive(Clone, Copy)]
pub struct Evaluator<'a> {
    pub interp: &'a Interpreter,
    pub syms: &'a Interner,
}

impl<'a> Evaluator<'a> {
    pub fn name(&self, sym: Symbol) -> &'a str {
        self.syms.name(sym)
    }

    pub fn registry(&self) -> &'a Registry {
        &self.interp.registry
    }

    pub fn eval(&self, ir: &Ir, ctx: &EvalContext<'_>) -> Result<Value, EvalError> {
        match ir {
            Ir::Literal(v) => Ok(v.clone()),
            Ir::List(items) => Ok(Value::List(
                items.iter().map(|i| self.eval(i, ctx)).collect::<Result<_, _>>()?,
            )),
            Ir::Var(sym) => self.lookup(*sym, ctx),
            Ir::This(None) => ctx.this_value().ok_or(EvalError::ThisOutsideQuery),
            Ir::This(Some(src)) => ctx.named_this(*src).cloned().ok_or_else(|| {
                EvalError::UnknownVariable(format!("{}.this", self.name(*src)))
            }),
            Ir::Call { name, args } => {
                let args = args.iter().map(|a| self.eval(a, ctx)).collect::<Result<Vec<_>, _>>()?;
                self.call(*name, &args)
            }
            Ir::Binary { op, lhs, rhs } => {
                let l = self.eval(lhs, ctx)?;
                match op {
                    BinOp::And if !l.truthy() => Ok(Value::Bool(false)),
                    BinOp::Or if l.truthy() => Ok(Value::Bool(true)),
                    _ => {
                        let r = self.eval(rhs, ctx)?;
                        Ok(apply_binary(*op, &l, &r)?)
                    }
                }
            }
            Ir::Unary { op, expr } => Ok(apply_unary(*op, &self.eval(expr, ctx)?)?),
            Ir::If {
                cond,
                then,
                otherwise,
            } => {
                let c = self.eval(cond, ctx)?;
                let branch = if c.truthy() {
                    then.as_slice()
                } else {
                    match otherwise {
                        Some(b) => b.as_slice(),
                        None => return Ok(c),
                    }
                };
                let mut last = Value::None;
                for e in branch {
                    last = self.eval(e, ctx)?;
                }
                Ok(last)
            }
            Ir::Query(q) => query::eval_query(self, q, ctx),
        }
    }

    pub fn lookup(&self, sym: Symbol, ctx: &EvalContext<'_>) -> Result<Value, EvalError> {
        if let Some(v) = ctx.lookup(sym) {
            return Ok(v.clone());
        }
        let name = self.name(sym);
        self.interp
            .env
            .get(name)
            .cloned()
            .ok_or_else(|| EvalError::UnknownVariable(name.to_string()))
    }

    pub fn call(&self, sym: Symbol, args: &[Value]) -> Result<Value, EvalError> {
        let name = self.name(sym);
        let entry = self
            .interp
            .registry
            .function(name)
            .ok_or_else(|| EvalError::UnknownFunction(name.to_string()))?;
        (entry.callable)(args).map_err(|e| EvalError::Host {
            function: name.to_string(),
            message: e.0,
        })
    }
}
