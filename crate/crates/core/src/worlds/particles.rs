//! A seeded, static particle world.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, HostError};
use crate::interpreter::Interpreter;
use crate::value::{EntityRef, Value};

pub const WORLD: &str = "particles";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Sphere,
    Box,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub id: i64,
    pub shape: Shape,
    pub mass: f64,
    pub velocity: [f64; 3],
    pub position: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleWorld {
    pub seed: u64,
    pub entities: Vec<Particle>,
}

impl ParticleWorld {
    pub fn new(seed: u64, n: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let triple = |rng: &mut ChaCha8Rng, r: f64| [0; 3].map(|_| rng.gen_range(-r..r));
        let entities = (0..n)
            .map(|i| Particle {
                id: i as i64,
                shape: if rng.gen_bool(0.5) { Shape::Sphere } else { Shape::Box },
                mass: rng.gen_range(0.1..10.0),
                velocity: triple(&mut rng, 2.0),
                position: triple(&mut rng, 5.0),
            })
            .collect();
        ParticleWorld { seed, entities }
    }

    /// The entity that enumerates the whole world when used as a FROM source.
    pub fn root() -> Value {
        Value::Entity(EntityRef::new(WORLD, 0))
    }

    pub fn entity(&self, index: usize) -> Value {
        Value::Entity(EntityRef::new(WORLD, index as u64 + 1))
    }

    pub fn get(&self, v: &Value) -> Option<&Particle> {
        match v {
            Value::Entity(e) if &*e.world == WORLD && e.handle > 0 => self.entities.get(e.handle as usize - 1),
            _ => None,
        }
    }

    /// Every entity record as a value, for reproducibility checks.
    pub fn dump(&self) -> Value {
        Value::list(self.entities.iter().map(|p| {
            Value::Dict(
                [
                    ("id", Value::Int(p.id)),
                    ("shape", Value::str(if p.shape == Shape::Sphere { "sphere" } else { "box" })),
                    ("mass", Value::Float(p.mass)),
                    ("velocity", floats(&p.velocity)),
                    ("position", floats(&p.position)),
                ]
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            )
        }))
    }
}

fn floats(xs: &[f64]) -> Value {
    Value::list(xs.iter().map(|&x| Value::Float(x)))
}

fn axis(v: &Value) -> Result<usize, HostError> {
    v.as_i64()
        .filter(|a| (0..3).contains(a))
        .map(|a| a as usize)
        .ok_or_else(|| HostError::new(format!("axis must be 0, 1 or 2, got {v}")))
}

/// Registers the entity functions and binds `space` to the world root.
pub fn attach(interp: &mut Interpreter, world: ParticleWorld) -> Result<Arc<ParticleWorld>, Error> {
    let world = Arc::new(world);

    let w = world.clone();
    interp.add_entity_source(WORLD, move |handle| {
        (handle == 0).then(|| (0..w.entities.len()).map(|i| w.entity(i)).collect())
    });

    type Getter = fn(&Particle, &[Value]) -> Result<Value, HostError>;
    let getters: [(&str, usize, Getter); 8] = [
        ("id", 1, |p, _| Ok(Value::Int(p.id))),
        ("mass", 1, |p, _| Ok(Value::Float(p.mass))),
        ("velocity", 1, |p, _| Ok(floats(&p.velocity))),
        ("linearVelocity", 2, |p, a| Ok(Value::Float(p.velocity[axis(&a[1])?]))),
        ("position", 1, |p, _| Ok(floats(&p.position))),
        ("coord", 2, |p, a| Ok(Value::Float(p.position[axis(&a[1])?]))),
        ("isSphere", 1, |p, _| Ok(Value::Bool(p.shape == Shape::Sphere))),
        ("hasBody", 1, |_, _| Ok(Value::Bool(true))),
    ];
    for (name, n, get) in getters {
        let w = world.clone();
        interp.add_function(name, false, move |args| {
            if args.len() != n {
                return Err(HostError::new(format!("{name} expects {n} argument(s), got {}", args.len())));
            }
            let p = w
                .get(&args[0])
                .ok_or_else(|| HostError::new(format!("{name}: {} is not a particle", args[0])))?;
            get(p, args)
        })?;
    }
    interp.add_function("obj", false, |args| match args {
        [e @ Value::Entity(_)] => Ok(e.clone()),
        _ => Err(HostError::new("obj expects one entity")),
    })?;

    interp.set_variable("space", ParticleWorld::root());
    Ok(world)
}
