//! Edit-session state: the working mesh, its revision counter and the
//! undo/redo stacks. Every mutation is serialized by a per-session lock;
//! readers only clone the current `Arc<Mesh64>` under it.

use std::collections::VecDeque;
use std::sync::{Arc, Mutex, MutexGuard};

use tiltwarp::geometry::Point2;
use tiltwarp::{Image, Mesh64};

use crate::error::ApiError;

pub const DEFAULT_UNDO_DEPTH: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MoveOutcome {
    Accepted { revision: u64 },
    Rejected { revision: u64, cell: (usize, usize) },
}

#[derive(Debug)]
struct EditState {
    revision: u64,
    current: Arc<Mesh64>,
    undo: VecDeque<Arc<Mesh64>>,
    redo: Vec<Arc<Mesh64>>,
}

#[derive(Debug)]
pub struct EditSession {
    id: String,
    source: Arc<Image>,
    rig: Mesh64,
    undo_depth: usize,
    state: Mutex<EditState>,
}

impl EditSession {
    /// New session over `source`; `initial` defaults to the rigid
    /// `cols`×`rows` lattice and must match the image frame.
    pub fn new(
        id: String,
        source: Image,
        initial: Option<Mesh64>,
        grid: (usize, usize),
        undo_depth: usize,
    ) -> Result<Self, ApiError> {
        let (w, h) = (source.width(), source.height());
        let mesh = match initial {
            Some(m) => {
                if (m.frame_width(), m.frame_height()) != (w, h) {
                    return Err(ApiError::bad_request(format!(
                        "mesh frame {}x{} does not match image {w}x{h}",
                        m.frame_width(),
                        m.frame_height()
                    )));
                }
                m.validate()?;
                m
            }
            None => Mesh64::rigid(w, h, grid.0, grid.1)?,
        };
        let rig = Mesh64::rigid(w, h, mesh.cols(), mesh.rows())?;
        Ok(Self {
            id,
            source: Arc::new(source),
            rig,
            undo_depth: undo_depth.max(1),
            state: Mutex::new(EditState {
                revision: 0,
                current: Arc::new(mesh),
                undo: VecDeque::new(),
                redo: Vec::new(),
            }),
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn source(&self) -> &Arc<Image> {
        &self.source
    }

    pub fn rig(&self) -> &Mesh64 {
        &self.rig
    }

    fn lock(&self) -> MutexGuard<'_, EditState> {
        // state is only assigned after validation, so a poisoned lock is
        // still consistent
        self.state.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Current revision and mesh.
    pub fn snapshot(&self) -> (u64, Arc<Mesh64>) {
        let s = self.lock();
        (s.revision, Arc::clone(&s.current))
    }

    /// Move vertex `(i, j)` to `(m, n)`. Commits only if the result passes
    /// quad validity. `expected` guards against editing a stale revision.
    pub fn move_vertex(
        &self,
        i: usize,
        j: usize,
        m: f64,
        n: f64,
        expected: Option<u64>,
    ) -> Result<MoveOutcome, ApiError> {
        let mut s = self.lock();
        if let Some(rev) = expected {
            if rev != s.revision {
                return Err(ApiError::conflict(format!(
                    "revision {rev} is stale, current is {}",
                    s.revision
                )));
            }
        }
        let (cols, rows) = (s.current.cols(), s.current.rows());
        if i > cols || j > rows {
            return Err(ApiError::bad_request(format!(
                "vertex ({i}, {j}) outside {}x{} vertex grid",
                cols + 1,
                rows + 1
            )));
        }
        if !m.is_finite() || !n.is_finite() {
            return Err(ApiError::bad_request("vertex coordinates must be finite"));
        }
        let mut next = (*s.current).clone();
        next.set_vertex(i, j, Point2::new(m, n));
        if let Some(cell) = next.first_invalid_cell() {
            return Ok(MoveOutcome::Rejected {
                revision: s.revision,
                cell,
            });
        }
        let prev = std::mem::replace(&mut s.current, Arc::new(next));
        self.push_undo(&mut s, prev);
        s.redo.clear();
        s.revision += 1;
        Ok(MoveOutcome::Accepted { revision: s.revision })
    }

    fn push_undo(&self, s: &mut EditState, mesh: Arc<Mesh64>) {
        if s.undo.len() == self.undo_depth {
            s.undo.pop_front();
        }
        s.undo.push_back(mesh);
    }

    /// Restore the mesh before the last accepted change. Returns the new
    /// revision, or `None` when there is nothing to undo.
    pub fn undo(&self) -> Option<u64> {
        let mut s = self.lock();
        let prev = s.undo.pop_back()?;
        let cur = std::mem::replace(&mut s.current, prev);
        s.redo.push(cur);
        s.revision += 1;
        Some(s.revision)
    }

    pub fn redo(&self) -> Option<u64> {
        let mut s = self.lock();
        let next = s.redo.pop()?;
        let cur = std::mem::replace(&mut s.current, next);
        self.push_undo(&mut s, cur);
        s.revision += 1;
        Some(s.revision)
    }
}
