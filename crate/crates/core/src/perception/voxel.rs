use nalgebra::DVector;

use super::{ObjectFrame, PointCloud};

/// Cells per grid axis.
pub const GRID_DIM: usize = 20;
/// Edge length of one cubic voxel in meters.
pub const VOXEL_SIZE: f64 = 0.01;
/// Half extent of the grid along each axis; the grid spans [-0.10, 0.10) m.
pub const GRID_HALF_EXTENT: f64 = 0.10;
/// Total voxel count (20^3).
pub const VOXEL_CELL_COUNT: usize = GRID_DIM * GRID_DIM * GRID_DIM;

/// Binary occupancy grid of an object, axis-aligned with its [`ObjectFrame`]
/// and centered on the frame origin.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    occupancy: Vec<bool>,
    pub voxel_size: f64,
    pub frame: ObjectFrame,
    /// Points that fell outside the +/-0.10 m extent and were dropped.
    pub dropped_count: usize,
}

impl VoxelGrid {
    /// An empty grid attached to `frame`.
    pub fn empty(frame: ObjectFrame) -> Self {
        Self {
            occupancy: vec![false; VOXEL_CELL_COUNT],
            voxel_size: VOXEL_SIZE,
            frame,
            dropped_count: 0,
        }
    }

    pub fn is_occupied(&self, i: usize, j: usize, k: usize) -> bool {
        self.occupancy[Self::flat_index(i, j, k)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, value: bool) {
        self.occupancy[Self::flat_index(i, j, k)] = value;
    }

    pub fn occupied_count(&self) -> usize {
        self.occupancy.iter().filter(|&&o| o).count()
    }

    pub fn flat_index(i: usize, j: usize, k: usize) -> usize {
        debug_assert!(i < GRID_DIM && j < GRID_DIM && k < GRID_DIM);
        (i * GRID_DIM + j) * GRID_DIM + k
    }

    /// Flattened occupancy as a real vector in {0,1}^8000, the PCA input.
    pub fn as_feature_vector(&self) -> DVector<f64> {
        DVector::from_iterator(
            VOXEL_CELL_COUNT,
            self.occupancy.iter().map(|&o| if o { 1.0 } else { 0.0 }),
        )
    }
}

/// Rasterize a cloud into the binary occupancy grid of `frame`.
///
/// Each point is transformed into frame coordinates; cell index is
/// `floor((coord + 0.10) / 0.01)` per axis. A cell is occupied when at least
/// one point lands in it. Points outside the extent are dropped and counted,
/// never clamped.
pub fn voxelize(cloud: &PointCloud, frame: &ObjectFrame) -> VoxelGrid {
    let mut grid = VoxelGrid::empty(frame.clone());
    for p in &cloud.points {
        let local = frame.to_local(p);
        let mut idx = [0usize; 3];
        let mut inside = true;
        for a in 0..3 {
            let cell = ((local[a] + GRID_HALF_EXTENT) / VOXEL_SIZE).floor();
            if cell < 0.0 || cell >= GRID_DIM as f64 {
                inside = false;
                break;
            }
            idx[a] = cell as usize;
        }
        if inside {
            grid.set(idx[0], idx[1], idx[2], true);
        } else {
            grid.dropped_count += 1;
        }
    }
    grid
}
