//! Ontology, entity database, semantic dialogue acts and the system action
//! spaces of the feudal decomposition.

mod act;
mod actions;
mod database;
mod ontology;

use std::path::Path;

pub use act::{ActItem, ActType, DialogueAct};
pub use actions::{
    enumerate_actions, ActionSpaceMode, GeneralAction, InfoKind, MasterAction, MergedAction,
    SystemAction, SystemActionSpace,
};
pub use database::{Entity, EntityDatabase, ENTITY_NAME};
pub use ontology::{InformableSlot, Ontology, DONTCARE, NONE};

use crate::error::Result;

/// An ontology together with the entity table it describes.
///
/// Immutable after construction; share it behind an `Arc` across sessions.
#[derive(Debug, Clone)]
pub struct Domain {
    pub ontology: Ontology,
    pub db: EntityDatabase,
}

/// Seed used for the procedurally generated databases of the bundled domains.
pub const DATABASE_SEED: u64 = 20_211_213;
/// Number of entities in every bundled database.
pub const DATABASE_SIZE: usize = 110;

const CR_ONTOLOGY: &str = include_str!("../../domains/cr.json");
const SFR_ONTOLOGY: &str = include_str!("../../domains/sfr.json");

impl Domain {
    pub fn new(ontology: Ontology, db: EntityDatabase) -> Result<Self> {
        db.validate(&ontology)?;
        Ok(Self { ontology, db })
    }

    /// Loads an ontology file and a database file.
    pub fn load(ontology: impl AsRef<Path>, db: impl AsRef<Path>) -> Result<Self> {
        let ontology = Ontology::load(ontology)?;
        let db = EntityDatabase::load(db)?;
        Self::new(ontology, db)
    }

    /// Loads an ontology file and generates its database procedurally.
    pub fn load_generated(ontology: impl AsRef<Path>) -> Result<Self> {
        let ontology = Ontology::load(ontology)?;
        let db = EntityDatabase::generate(&ontology, DATABASE_SIZE, DATABASE_SEED);
        Self::new(ontology, db)
    }

    /// Bundled Cambridge-restaurant-like toy domain: 3 informable slots.
    pub fn cambridge_restaurants() -> Self {
        Self::bundled(CR_ONTOLOGY)
    }

    /// Bundled San-Francisco-restaurant-like domain: 6 informable slots.
    pub fn sf_restaurants() -> Self {
        Self::bundled(SFR_ONTOLOGY)
    }

    /// Looks up a bundled domain by its short id (`cr` or `sfr`).
    pub fn by_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "cr" | "cambridge" => Some(Self::cambridge_restaurants()),
            "sfr" | "sanfrancisco" => Some(Self::sf_restaurants()),
            _ => None,
        }
    }

    fn bundled(src: &str) -> Self {
        let ontology = Ontology::from_json_str(src).expect("bundled ontology is valid");
        let db = EntityDatabase::generate(&ontology, DATABASE_SIZE, DATABASE_SEED);
        Self { ontology, db }
    }
}
