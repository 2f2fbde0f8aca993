use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::LinkError;
use crate::channel::medium::MediumSpec;
use crate::channel::scenario::validate_sps;
use crate::channel::{ChannelParams, Scenario};
use crate::phy_modes::mode_by_id;
use crate::stats::DEFAULT_WINDOW_S;
use crate::waveform::Levels;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Tx,
    Rx,
    Both,
}

impl std::str::FromStr for Role {
    type Err = LinkError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tx" => Ok(Role::Tx),
            "rx" => Ok(Role::Rx),
            "both" => Ok(Role::Both),
            _ => Err(LinkError::Config(format!("unknown role {s:?}"))),
        }
    }
}

impl Role {
    pub fn transmits(self) -> bool {
        self != Role::Rx
    }

    pub fn receives(self) -> bool {
        self != Role::Tx
    }
}

/// Everything a running node can be told.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkConfig {
    pub mode_id: u8,
    pub sps: usize,
    pub levels: Levels,
    pub channel: ChannelParams,
    pub medium: MediumSpec,
    pub role: Role,
    pub window_s: f64,
}

impl Default for LinkConfig {
    fn default() -> Self {
        LinkConfig::from_scenario(&Scenario::default(), MediumSpec::Inproc, Role::Both)
    }
}

impl LinkConfig {
    pub fn from_scenario(s: &Scenario, medium: MediumSpec, role: Role) -> Self {
        LinkConfig {
            mode_id: s.mode_id,
            sps: s.sps,
            levels: s.levels,
            channel: s.channel.clone(),
            medium,
            role,
            window_s: DEFAULT_WINDOW_S,
        }
    }

    pub fn validate(&self) -> Result<(), LinkError> {
        mode_by_id(self.mode_id as u32)?;
        validate_sps(self.sps)?;
        self.levels.validate()?;
        self.channel.validate()?;
        if !(self.window_s > 0.0 && self.window_s.is_finite()) {
            return Err(LinkError::Config("window_s must be > 0".into()));
        }
        Ok(())
    }

    /// Applies a partial JSON object. Nested objects merge field by field.
    /// Medium and role are fixed for the life of a node. Nothing changes
    /// unless the whole patched config validates.
    pub fn patched(&self, patch: &Value) -> Result<LinkConfig, LinkError> {
        let obj = patch.as_object().ok_or_else(|| LinkError::Config("patch must be a JSON object".into()))?;
        for fixed in ["medium", "role"] {
            if obj.contains_key(fixed) {
                return Err(LinkError::Config(format!("{fixed} cannot change while the node is running")));
            }
        }
        let mut v = serde_json::to_value(self).expect("config serializes");
        merge(&mut v, patch);
        let next: LinkConfig = serde_json::from_value(v).map_err(|e| LinkError::Config(e.to_string()))?;
        next.validate()?;
        Ok(next)
    }
}

fn merge(base: &mut Value, patch: &Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    Some(slot) => *slot = v.clone(),
                    None => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (b, p) => *b = p.clone(),
    }
}
