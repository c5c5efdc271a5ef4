//! A 2D occupancy grid with one movable robot.

use std::path::Path;
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::error::{Error, HostError};
use crate::interpreter::Interpreter;
use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("map is empty")]
    Empty,
    #[error("line {line} has length {found}, expected {expected}")]
    Ragged { line: usize, expected: usize, found: usize },
    #[error("unexpected character {ch:?} at line {line}, column {column}")]
    BadChar { ch: char, line: usize, column: usize },
    #[error("expected exactly one `{0}` cell")]
    Marker(char),
    #[error("cannot read map: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMap {
    pub width: usize,
    pub height: usize,
    /// Row-major; true marks an obstacle.
    pub cells: Vec<bool>,
    pub start: [i64; 2],
    pub goal: [i64; 2],
}

impl GridMap {
    /// Parses the text format: equal-length lines of `#`, `.`, `S` and `G`;
    /// line 0 is y = 0.
    pub fn parse(text: &str) -> Result<Self, MapError> {
        let lines: Vec<&str> = text.lines().map(|l| l.strip_suffix('\r').unwrap_or(l)).collect();
        let width = lines.first().map_or(0, |l| l.chars().count());
        if lines.is_empty() || width == 0 {
            return Err(MapError::Empty);
        }
        let mut cells = Vec::with_capacity(width * lines.len());
        let (mut start, mut goal) = (Vec::new(), Vec::new());
        for (y, line) in lines.iter().enumerate() {
            let found = line.chars().count();
            if found != width {
                return Err(MapError::Ragged {
                    line: y,
                    expected: width,
                    found,
                });
            }
            for (x, ch) in line.chars().enumerate() {
                let pos = [x as i64, y as i64];
                match ch {
                    '#' => cells.push(true),
                    '.' => cells.push(false),
                    'S' => {
                        start.push(pos);
                        cells.push(false)
                    }
                    'G' => {
                        goal.push(pos);
                        cells.push(false)
                    }
                    _ => {
                        return Err(MapError::BadChar {
                            ch,
                            line: y,
                            column: x,
                        })
                    }
                }
            }
        }
        let [start] = start[..] else { return Err(MapError::Marker('S')) };
        let [goal] = goal[..] else { return Err(MapError::Marker('G')) };
        Ok(GridMap {
            width,
            height: lines.len(),
            cells,
            start,
            goal,
        })
    }

    pub fn load(path: &Path) -> Result<Self, MapError> {
        let text = std::fs::read_to_string(path).map_err(|e| MapError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// An obstacle-free map with start at the origin and goal in the far corner.
    pub fn empty(width: usize, height: usize) -> Self {
        GridMap {
            width,
            height,
            cells: vec![false; width * height],
            start: [0, 0],
            goal: [width as i64 - 1, height as i64 - 1],
        }
    }

    pub fn in_bounds(&self, [x, y]: [i64; 2]) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height
    }

    pub fn is_obstacle(&self, p: [i64; 2]) -> bool {
        self.in_bounds(p) && self.cells[p[1] as usize * self.width + p[0] as usize]
    }
}

/// Mutable world state shared by the registered functions.
#[derive(Debug)]
pub struct GridWorld {
    pub map: GridMap,
    pub robot: [i64; 2],
    /// Paths passed to `playSound`, in call order.
    pub sounds: Vec<String>,
}

impl GridWorld {
    pub fn new(map: GridMap) -> Self {
        let robot = map.start;
        GridWorld {
            map,
            robot,
            sounds: Vec::new(),
        }
    }
}

fn point(v: &Value) -> Result<[i64; 2], HostError> {
    match v.as_list() {
        Some([x, y]) => match (x.as_i64(), y.as_i64()) {
            (Some(x), Some(y)) => Ok([x, y]),
            _ => Err(HostError::new(format!("expected integer [x, y], got {v}"))),
        },
        _ => Err(HostError::new(format!("expected integer [x, y], got {v}"))),
    }
}

fn coords(v: &Value) -> Result<Vec<f64>, HostError> {
    v.as_list()
        .and_then(|items| items.iter().map(Value::as_f64).collect::<Option<Vec<_>>>())
        .ok_or_else(|| HostError::new(format!("expected a list of numbers, got {v}")))
}

fn point_value([x, y]: [i64; 2]) -> Value {
    Value::list([Value::Int(x), Value::Int(y)])
}

fn arity(name: &str, args: &[Value], n: usize) -> Result<(), HostError> {
    if args.len() == n {
        Ok(())
    } else {
        Err(HostError::new(format!("{name} expects {n} argument(s), got {}", args.len())))
    }
}

/// Registers `position`, `move`, `checkCollision`, `distance` and
/// `playSound`, and binds `robot`, `start_pos` and `target_pos`. The robot
/// argument of the functions is accepted but not inspected: there is one robot.
pub fn attach(interp: &mut Interpreter, map: GridMap) -> Result<Arc<Mutex<GridWorld>>, Error> {
    let (start, goal) = (map.start, map.goal);
    let world = Arc::new(Mutex::new(GridWorld::new(map)));

    let w = world.clone();
    interp.add_function("position", false, move |args| {
        arity("position", args, 1)?;
        Ok(point_value(w.lock().unwrap().robot))
    })?;

    let w = world.clone();
    interp.add_function("move", false, move |args| {
        arity("move", args, 2)?;
        let p = point(&args[1])?;
        let mut w = w.lock().unwrap();
        if w.map.in_bounds(p) {
            w.robot = p;
            Ok(point_value(p))
        } else {
            Ok(Value::list([]))
        }
    })?;

    let w = world.clone();
    interp.add_function("checkCollision", false, move |args| {
        arity("checkCollision", args, 1)?;
        let w = w.lock().unwrap();
        Ok(Value::Bool(w.map.is_obstacle(w.robot)))
    })?;

    interp.add_function("distance", false, |args| {
        arity("distance", args, 2)?;
        let (a, b) = (coords(&args[0])?, coords(&args[1])?);
        if a.len() != b.len() {
            return Err(HostError::new("distance between points of different dimension"));
        }
        Ok(Value::Float(a.iter().zip(&b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt()))
    })?;

    let w = world.clone();
    interp.add_function("playSound", false, move |args| {
        arity("playSound", args, 1)?;
        let path = args[0]
            .as_str()
            .ok_or_else(|| HostError::new("playSound expects a path string"))?;
        w.lock().unwrap().sounds.push(path.to_string());
        Ok(Value::Bool(true))
    })?;

    interp.set_variable("robot", Value::str("robot"));
    interp.set_variable("start_pos", point_value(start));
    interp.set_variable("target_pos", point_value(goal));
    Ok(world)
}

/// The eight unit steps, in the order scripts list them.
pub const DIRECTIONS: [[i64; 2]; 8] = [[0, 1], [0, -1], [1, -1], [-1, -1], [1, 0], [-1, 0], [-1, 1], [1, 1]];

/// Path-planning script: simple goal-reaching paths of at most `max_len`
/// steps, shortest first, with an optional result cap.
pub fn census_script(max_len: usize, maximum: Option<usize>) -> String {
    let cap = maximum.map(|m| format!(" MAXIMUM {m}")).unwrap_or_default();
    format!(
        "directions = [[0, 1],[0,-1],[1,-1],[-1,-1],[1, 0],[-1, 0],[-1, 1],[1, 1]];\n\
         SELECT (this + cur_pos) FROM directions\n\
         WHERE target_pos == move(robot, this + cur_pos)\n\
         START WITH cur_pos = start_pos, level = 1\n\
         CONNECT BY MEMORIZE {max_len}{cap}\n\
         \x20          cur_pos = move(robot, cur_pos + this),\n\
         \x20          level = level + 1\n\
         STOP WITH target_pos == move(robot, this + cur_pos) OR\n\
         \x20          [] == move(robot, this + cur_pos) OR\n\
         \x20          IF(checkCollision(robot); playSound(\"bell.ogg\"), true)\n\
         AS list;\n"
    )
}
