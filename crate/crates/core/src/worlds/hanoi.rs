//! Towers of Hanoi.

use crate::error::{Error, HostError};
use crate::interpreter::Interpreter;
use crate::value::Value;

pub type Towers = [Vec<i64>; 3];

/// The canonical six moves, in the order scripts list them.
pub const MOVES: [[usize; 2]; 6] = [[0, 1], [0, 2], [1, 0], [1, 2], [2, 0], [2, 1]];

/// All disks on the first tower, largest at the bottom.
pub fn start(disks: usize) -> Towers {
    [(1..=disks as i64).rev().collect(), Vec::new(), Vec::new()]
}

pub fn goal(disks: usize) -> Towers {
    [Vec::new(), Vec::new(), (1..=disks as i64).rev().collect()]
}

/// Moves the top disk of `from` onto `to`; `None` if the move is illegal.
pub fn apply(step: [usize; 2], towers: &Towers) -> Option<Towers> {
    let [from, to] = step;
    let disk = *towers[from].last()?;
    if from == to || towers[to].last().is_some_and(|&top| top < disk) {
        return None;
    }
    let mut next = towers.clone();
    next[from].pop();
    next[to].push(disk);
    Some(next)
}

pub fn to_value(towers: &Towers) -> Value {
    Value::list(towers.iter().map(|t| Value::list(t.iter().map(|&d| Value::Int(d)))))
}

fn parse_step(v: &Value) -> Result<[usize; 2], HostError> {
    let err = || HostError::new(format!("step must be a pair of tower indices, got {v}"));
    match v.as_list() {
        Some([a, b]) => {
            let idx = |x: &Value| x.as_i64().filter(|i| (0..3).contains(i)).map(|i| i as usize);
            Ok([idx(a).ok_or_else(err)?, idx(b).ok_or_else(err)?])
        }
        _ => Err(err()),
    }
}

fn parse_towers(v: &Value) -> Result<Option<Towers>, HostError> {
    let err = || HostError::new(format!("towers must be a list of three lists of disks, got {v}"));
    let items = v.as_list().ok_or_else(err)?;
    if items.is_empty() {
        return Ok(None);
    }
    let [a, b, c] = items else { return Err(err()) };
    let tower = |t: &Value| -> Result<Vec<i64>, HostError> {
        t.as_list()
            .ok_or_else(err)?
            .iter()
            .map(|d| d.as_i64().ok_or_else(err))
            .collect()
    };
    Ok(Some([tower(a)?, tower(b)?, tower(c)?]))
}

/// `move(step, towers)`: the new configuration, or `[]` when the step is
/// illegal or `towers` is already `[]`. The input is never modified.
pub fn move_fn(args: &[Value]) -> Result<Value, HostError> {
    let [step, towers] = args else {
        return Err(HostError::new(format!("move expects 2 arguments, got {}", args.len())));
    };
    let step = parse_step(step)?;
    Ok(parse_towers(towers)?
        .and_then(|t| apply(step, &t))
        .map_or_else(|| Value::list([]), |t| to_value(&t)))
}

pub fn attach(interp: &mut Interpreter) -> Result<(), Error> {
    interp.add_function("move", false, move_fn)
}

/// Search strategy used by [`script`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Nested products of every move sequence, no hierarchy.
    Vanilla,
    Default,
    NoCycle,
    Unique,
    Memorize,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::Vanilla,
        Strategy::Default,
        Strategy::NoCycle,
        Strategy::Unique,
        Strategy::Memorize,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Vanilla => "vanilla",
            Strategy::Default => "default",
            Strategy::NoCycle => "nocycle",
            Strategy::Unique => "unique",
            Strategy::Memorize => "memorize",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|st| st.name() == s.trim().to_ascii_lowercase())
    }
}

fn towers_src(t: &Towers) -> String {
    to_value(t).serialize()
}

/// A script solving `disks`-disk Hanoi with paths of at most 2^disks - 1
/// moves. Each result is the list of moves.
pub fn script(disks: usize, strategy: Strategy) -> String {
    let len = (1usize << disks) - 1;
    let start = towers_src(&start(disks));
    let goal = towers_src(&goal(disks));
    let moves = "moves = [[0,1], [0,2], [1,0], [1,2], [2,0], [2,1]];\n";
    let mode = match strategy {
        Strategy::Vanilla => {
            let names: Vec<String> = (1..=len).map(|i| format!("m{i}")).collect();
            let select = names.iter().map(|n| format!("{n}.this")).collect::<Vec<_>>().join(", ");
            let from = names.iter().map(|n| format!("{n}=moves")).collect::<Vec<_>>().join(", ");
            let nested = names
                .iter()
                .fold(start.clone(), |acc, n| format!("move({n}.this, {acc})"));
            return format!("{moves}SELECT {select}\nFROM {from}\nWHERE {goal} == {nested}\nAS list;\n");
        }
        Strategy::Memorize => {
            return format!(
                "{moves}SELECT this FROM moves WHERE {goal} == move(this, tower)\n\
                 START WITH tower = {start}\n\
                 CONNECT BY MEMORIZE {len} tower = move(this, tower)\n\
                 STOP WITH [] == move(this, tower);\n"
            );
        }
        Strategy::Default => "",
        Strategy::NoCycle => "NO CYCLE ",
        Strategy::Unique => "UNIQUE ",
    };
    format!(
        "{moves}SELECT this FROM moves WHERE {goal} == move(this, tower)\n\
         START WITH tower = {start}, level = 1\n\
         CONNECT BY {mode}tower = move(this, tower), level = level + 1\n\
         STOP WITH level == {len} or [] == move(this, tower);\n"
    )
}
