use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use chrono::{DateTime, Utc};
use polygreen::deformer::{CoordinateField, Lattice};
use polygreen::Cage;

/// A rest cage with its grid encoded once; never modified after creation.
#[derive(Debug)]
pub struct Session {
    pub id: String,
    pub cage: Cage,
    pub lattice: Lattice,
    pub field: CoordinateField,
    pub grid_res: usize,
    pub target_order: usize,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Clone)]
pub struct StoredImage {
    pub content_type: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone, Default)]
pub struct ServiceConfig {
    /// When set, every new field is also written here as `<id>.pgc`.
    pub snapshot_dir: Option<PathBuf>,
    /// Allowed CORS origins; empty allows any origin.
    pub allowed_origins: Vec<String>,
}

#[derive(Debug, Default)]
struct Tables {
    sessions: HashMap<String, Arc<Session>>,
    images: HashMap<String, StoredImage>,
}

#[derive(Debug, Clone, Default)]
pub struct AppState {
    tables: Arc<RwLock<Tables>>,
    pub config: Arc<ServiceConfig>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Self {
        AppState {
            tables: Arc::default(),
            config: Arc::new(config),
        }
    }

    pub fn insert(&self, session: Session) -> Arc<Session> {
        let session = Arc::new(session);
        self.tables
            .write()
            .unwrap()
            .sessions
            .insert(session.id.clone(), session.clone());
        session
    }

    pub fn get(&self, id: &str) -> Option<Arc<Session>> {
        self.tables.read().unwrap().sessions.get(id).cloned()
    }

    pub fn remove(&self, id: &str) -> Option<Arc<Session>> {
        let mut t = self.tables.write().unwrap();
        t.images.remove(id);
        t.sessions.remove(id)
    }

    pub fn len(&self) -> usize {
        self.tables.read().unwrap().sessions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Stores the image if the session still exists.
    pub fn set_image(&self, id: &str, image: StoredImage) -> bool {
        let mut t = self.tables.write().unwrap();
        if !t.sessions.contains_key(id) {
            return false;
        }
        t.images.insert(id.to_owned(), image);
        true
    }

    pub fn image(&self, id: &str) -> Option<StoredImage> {
        self.tables.read().unwrap().images.get(id).cloned()
    }

    pub fn has_image(&self, id: &str) -> bool {
        self.tables.read().unwrap().images.contains_key(id)
    }

    pub fn snapshot_path(&self, id: &str) -> Option<PathBuf> {
        self.config
            .snapshot_dir
            .as_ref()
            .map(|d| d.join(format!("{id}.pgc")))
    }
}
