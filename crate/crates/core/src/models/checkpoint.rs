//! Text checkpoints: a JSON object with a `meta` block followed by one entry
//! per parameter tensor, stored as nested arrays in the tensor's shape.
//! Numbers are written in shortest round-trip form, so save/load is lossless.

use std::path::Path;

use serde_json::{json, Map, Value};

use super::{zero_actor_critic, HybridModel, NamedParam, Variant};
use crate::envs::EnvName;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct CheckpointMeta {
    pub env: EnvName,
    pub variant: Variant,
    pub n_qubits: usize,
    pub n_layers: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub meta: CheckpointMeta,
    pub actor: HybridModel,
    pub critic: HybridModel,
}

fn nest(data: &[f64], shape: &[usize]) -> Value {
    match shape {
        [] | [_] => Value::Array(data.iter().map(|v| json!(v)).collect()),
        [_, rest @ ..] => {
            let stride: usize = rest.iter().product();
            Value::Array(
                data.chunks(stride.max(1))
                    .map(|chunk| nest(chunk, rest))
                    .collect(),
            )
        }
    }
}

fn flatten_into(v: &Value, shape: &[usize], name: &str, out: &mut Vec<f64>) -> Result<()> {
    let bad = || Error::config(format!("checkpoint entry `{name}` does not match shape"));
    let arr = v.as_array().ok_or_else(bad)?;
    let (&len, rest) = shape.split_first().ok_or_else(bad)?;
    if arr.len() != len {
        return Err(bad());
    }
    for item in arr {
        if rest.is_empty() {
            out.push(item.as_f64().ok_or_else(bad)?);
        } else {
            flatten_into(item, rest, name, out)?;
        }
    }
    Ok(())
}

impl Checkpoint {
    pub fn to_json_string(&self) -> String {
        let mut obj = Map::new();
        obj.insert(
            "meta".into(),
            json!({
                "env": self.meta.env.to_string(),
                "variant": self.meta.variant.to_string(),
                "n_qubits": self.meta.n_qubits,
                "n_layers": self.meta.n_layers,
                "seed": self.meta.seed,
            }),
        );
        for NamedParam { name, shape, data, .. } in self.actor.params().into_iter().chain(self.critic.params()) {
            obj.insert(name, nest(&data, &shape));
        }
        serde_json::to_string_pretty(&Value::Object(obj)).expect("checkpoint serialisation")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let root: Value =
            serde_json::from_str(text).map_err(|e| Error::config(format!("checkpoint is not valid JSON: {e}")))?;
        let obj = root
            .as_object()
            .ok_or_else(|| Error::config("checkpoint root must be an object"))?;
        let meta = obj
            .get("meta")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::config("checkpoint has no `meta` block"))?;
        let field = |k: &str| meta.get(k).ok_or_else(|| Error::config(format!("checkpoint meta lacks `{k}`")));
        let as_usize = |k: &str| -> Result<usize> {
            field(k)?
                .as_u64()
                .map(|v| v as usize)
                .ok_or_else(|| Error::config(format!("checkpoint meta `{k}` must be an integer")))
        };
        let env: EnvName = field("env")?
            .as_str()
            .ok_or_else(|| Error::config("checkpoint meta `env` must be a string"))?
            .parse()?;
        let variant: Variant = field("variant")?
            .as_str()
            .ok_or_else(|| Error::config("checkpoint meta `variant` must be a string"))?
            .parse()?;
        let meta = CheckpointMeta {
            env,
            variant,
            n_qubits: as_usize("n_qubits")?,
            n_layers: as_usize("n_layers")?,
            seed: field("seed")?
                .as_u64()
                .ok_or_else(|| Error::config("checkpoint meta `seed` must be an integer"))?,
        };

        let spec = env.spec(env.default_max_steps());
        let (mut actor, mut critic) = zero_actor_critic(&spec, variant, meta.n_qubits, meta.n_layers)?;
        let expected: Vec<NamedParam> = actor.params().into_iter().chain(critic.params()).collect();
        if obj.len() != expected.len() + 1 {
            let unknown: Vec<&String> = obj
                .keys()
                .filter(|k| *k != "meta" && !expected.iter().any(|p| &p.name == *k))
                .collect();
            return Err(Error::config(format!(
                "checkpoint has {} tensors, model needs {} (unexpected: {unknown:?})",
                obj.len() - 1,
                expected.len()
            )));
        }
        for p in &expected {
            let v = obj
                .get(&p.name)
                .ok_or_else(|| Error::config(format!("checkpoint lacks `{}`", p.name)))?;
            let mut data = Vec::with_capacity(p.data.len());
            flatten_into(v, &p.shape, &p.name, &mut data)?;
            let model = if p.name.starts_with("actor.") { &mut actor } else { &mut critic };
            model.set_param(&p.name, &data)?;
        }
        Ok(Self { meta, actor, critic })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json_string()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}
