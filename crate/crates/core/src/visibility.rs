//! Binary visibility maps: which aircraft positions see a ground target.
//!
//! A map covers a square region centered on the target. Every cell holds 1
//! if an aircraft at that cell's center, flying at the map's altitude above
//! the target's ground elevation, has a clear line of sight to the target,
//! and 0 otherwise. Maps for several altitudes form a stack; because the
//! sight-line test is monotone in observer altitude, a single threshold
//! raster per target serves the whole stack.

use crate::error::{Error, Result};
use crate::terrain::{sight_threshold, GeoPoint, TerrainGrid};
use rayon::prelude::*;

/// Candidate flight altitudes, strictly increasing, in meters above the
/// target's ground elevation.
#[derive(Debug, Clone, PartialEq)]
pub struct AltitudeSet {
    altitudes: Vec<f64>,
}

impl AltitudeSet {
    pub fn new(altitudes: Vec<f64>) -> Result<Self> {
        if altitudes.is_empty() {
            return Err(Error::InvalidArgument("altitude set must be nonempty".into()));
        }
        if altitudes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("altitudes must be strictly increasing".into()));
        }
        Ok(Self { altitudes })
    }

    pub fn altitudes(&self) -> &[f64] {
        &self.altitudes
    }

    pub fn len(&self) -> usize {
        self.altitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.altitudes.is_empty()
    }
}

impl Default for AltitudeSet {
    /// 1 km to 4 km in 500 m steps.
    fn default() -> Self {
        Self { altitudes: (0..7).map(|i| 1_000.0 + 500.0 * i as f64).collect() }
    }
}

/// Region and sampling configuration for visibility maps.
#[derive(Debug, Clone, PartialEq)]
pub struct VisibilityParams {
    /// Half-width of the square region, meters.
    pub extent_half: f64,
    /// Cells per side.
    pub resolution: usize,
    /// Height of the observed point above the terrain surface at the target.
    pub target_height: f64,
    /// Apply the Earth-curvature correction to sight lines.
    pub earth_curvature: bool,
}

impl Default for VisibilityParams {
    fn default() -> Self {
        Self { extent_half: 15_000.0, resolution: 300, target_height: 0.0, earth_curvature: true }
    }
}

/// Binary raster of aircraft positions with clear line of sight to one
/// target at one altitude. Row-major, row 0 at the south edge.
#[derive(Debug, Clone, PartialEq)]
pub struct VisibilityMap {
    pub target_id: u32,
    /// Meters above the target's ground elevation.
    pub altitude_agl: f64,
    /// Half-width of the square region, meters.
    pub extent_half: f64,
    /// Cells per side.
    pub resolution: usize,
    /// 1 = visible, 0 = occluded.
    values: Vec<u8>,
    /// Target position (region center).
    pub center_x: f64,
    pub center_y: f64,
}

impl VisibilityMap {
    pub fn values(&self) -> &[u8] {
        &self.values
    }

    /// Width of one cell, meters.
    pub fn cell_spacing(&self) -> f64 {
        2.0 * self.extent_half / self.resolution as f64
    }

    pub fn value(&self, col: usize, row: usize) -> u8 {
        self.values[row * self.resolution + col]
    }

    /// Center coordinates of cell (col, row).
    pub fn cell_center(&self, col: usize, row: usize) -> (f64, f64) {
        let s = self.cell_spacing();
        (
            self.center_x - self.extent_half + (col as f64 + 0.5) * s,
            self.center_y - self.extent_half + (row as f64 + 0.5) * s,
        )
    }

    /// Visibility at an arbitrary point; positions outside the region are
    /// occluded.
    pub fn sample(&self, x: f64, y: f64) -> u8 {
        let s = self.cell_spacing();
        let fx = (x - (self.center_x - self.extent_half)) / s;
        let fy = (y - (self.center_y - self.extent_half)) / s;
        if fx < 0.0 || fy < 0.0 {
            return 0;
        }
        let col = fx as usize;
        let row = fy as usize;
        if col >= self.resolution || row >= self.resolution {
            return 0;
        }
        self.value(col, row)
    }

    pub fn fraction_visible(&self) -> f64 {
        let visible: usize = self.values.iter().map(|&v| v as usize).sum();
        visible as f64 / self.values.len() as f64
    }
}

/// Per-cell minimum visible altitude (exclusive) above the datum for seeing
/// `target` from each cell center of the square region. Cells outside the
/// terrain extent get an infinite threshold.
fn threshold_raster(grid: &TerrainGrid, target: &GeoPoint, params: &VisibilityParams) -> Vec<f64> {
    let res = params.resolution;
    let spacing = 2.0 * params.extent_half / res as f64;
    let x0 = target.x - params.extent_half;
    let y0 = target.y - params.extent_half;
    (0..res * res)
        .into_par_iter()
        .map(|idx| {
            let col = idx % res;
            let row = idx / res;
            let x = x0 + (col as f64 + 0.5) * spacing;
            let y = y0 + (row as f64 + 0.5) * spacing;
            if !grid.contains(x, y) {
                return f64::INFINITY;
            }
            sight_threshold(grid, x, y, target, params.earth_curvature)
                .unwrap_or(f64::INFINITY)
        })
        .collect()
}

fn maps_from_thresholds(
    thresholds: &[f64],
    ground: f64,
    target_id: u32,
    target_x: f64,
    target_y: f64,
    altitudes: &[f64],
    params: &VisibilityParams,
) -> Vec<VisibilityMap> {
    altitudes
        .iter()
        .map(|&agl| {
            let observer_alt = ground + agl;
            let values = thresholds.iter().map(|&t| u8::from(observer_alt > t)).collect();
            VisibilityMap {
                target_id,
                altitude_agl: agl,
                extent_half: params.extent_half,
                resolution: params.resolution,
                values,
                center_x: target_x,
                center_y: target_y,
            }
        })
        .collect()
}

fn target_point(grid: &TerrainGrid, x: f64, y: f64, params: &VisibilityParams) -> Result<GeoPoint> {
    if !grid.contains(x, y) {
        return Err(Error::OutOfExtent { x, y });
    }
    let ground = grid.elevation_at(x, y)?;
    Ok(GeoPoint::new(x, y, ground + params.target_height))
}

/// Visibility map for one target at one altitude above the target's ground
/// elevation.
pub fn compute_visibility_map(
    grid: &TerrainGrid,
    target_x: f64,
    target_y: f64,
    target_id: u32,
    altitude_agl: f64,
    params: &VisibilityParams,
) -> Result<VisibilityMap> {
    let target = target_point(grid, target_x, target_y, params)?;
    let thresholds = threshold_raster(grid, &target, params);
    let ground = target.alt - params.target_height;
    Ok(
        maps_from_thresholds(&thresholds, ground, target_id, target_x, target_y, &[altitude_agl], params)
            .pop()
            .expect("one altitude in, one map out"),
    )
}

/// One visibility map per altitude, in the (increasing) order of the set.
/// The sight-line thresholds are computed once and shared by all altitudes,
/// which also makes per-cell altitude monotonicity exact.
pub fn visibility_stack(
    grid: &TerrainGrid,
    target_x: f64,
    target_y: f64,
    target_id: u32,
    altitudes: &AltitudeSet,
    params: &VisibilityParams,
) -> Result<Vec<VisibilityMap>> {
    let target = target_point(grid, target_x, target_y, params)?;
    let thresholds = threshold_raster(grid, &target, params);
    let ground = target.alt - params.target_height;
    Ok(maps_from_thresholds(
        &thresholds,
        ground,
        target_id,
        target_x,
        target_y,
        altitudes.altitudes(),
        params,
    ))
}

/// Serializes a map as binary PGM (P5, maxval 1), rows north to south.
pub fn write_visibility_pgm(map: &VisibilityMap) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n1\n", map.resolution, map.resolution).into_bytes();
    for row in (0..map.resolution).rev() {
        for col in 0..map.resolution {
            out.push(map.value(col, row));
        }
    }
    out
}

/// One-line sidecar header describing a serialized map.
pub fn write_visibility_meta(map: &VisibilityMap) -> String {
    format!(
        "target_id={} center_x={} center_y={} altitude_agl={} extent_half={} resolution={}\n",
        map.target_id, map.center_x, map.center_y, map.altitude_agl, map.extent_half, map.resolution
    )
}

/// Reads a map back from its PGM body and sidecar header line.
pub fn read_visibility(pgm: &[u8], meta: &str) -> Result<VisibilityMap> {
    let mut target_id = None;
    let mut center_x = None;
    let mut center_y = None;
    let mut altitude_agl = None;
    let mut extent_half = None;
    let mut resolution = None;
    let line = meta.lines().next().unwrap_or("");
    for field in line.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| Error::Parse { line: 1, msg: format!("expected key=value, got '{field}'") })?;
        let num = value
            .parse::<f64>()
            .map_err(|_| Error::Parse { line: 1, msg: format!("'{value}' is not a number") })?;
        match key {
            "target_id" => target_id = Some(num as u32),
            "center_x" => center_x = Some(num),
            "center_y" => center_y = Some(num),
            "altitude_agl" => altitude_agl = Some(num),
            "extent_half" => extent_half = Some(num),
            "resolution" => resolution = Some(num as usize),
            other => return Err(Error::Parse { line: 1, msg: format!("unknown meta key '{other}'") }),
        }
    }
    let missing = |k: &str| Error::Parse { line: 1, msg: format!("missing meta key '{k}'") };
    let resolution = resolution.ok_or_else(|| missing("resolution"))?;

    // PGM header: magic, two dimensions, maxval, one whitespace byte, raster.
    let header = std::str::from_utf8(&pgm[..pgm.len().min(64)])
        .map_err(|_| Error::Parse { line: 1, msg: "invalid PGM header".into() })?;
    let mut fields = header.split_ascii_whitespace();
    if fields.next() != Some("P5") {
        return Err(Error::Parse { line: 1, msg: "not a P5 PGM".into() });
    }
    let mut dims = [0usize; 3];
    let mut consumed = 2usize; // past "P5"
    for slot in &mut dims {
        let tok = fields
            .next()
            .ok_or_else(|| Error::Parse { line: 1, msg: "truncated PGM header".into() })?;
        *slot = tok
            .parse()
            .map_err(|_| Error::Parse { line: 1, msg: format!("bad PGM dimension '{tok}'") })?;
        let pos = header[consumed..].find(tok).expect("token came from header") + consumed;
        consumed = pos + tok.len();
    }
    let [w, h, maxval] = dims;
    if w != resolution || h != resolution || maxval != 1 {
        return Err(Error::Parse {
            line: 1,
            msg: format!("PGM is {w}x{h} maxval {maxval}, expected {resolution}x{resolution} maxval 1"),
        });
    }
    let data = &pgm[consumed + 1..];
    if data.len() != w * h {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected {} raster bytes, got {}", w * h, data.len()),
        });
    }
    let mut values = vec![0u8; w * h];
    for (i, &b) in data.iter().enumerate() {
        if b > 1 {
            return Err(Error::Parse { line: 1, msg: format!("non-binary raster byte {b}") });
        }
        let row = h - 1 - i / w;
        let col = i % w;
        values[row * w + col] = b;
    }
    Ok(VisibilityMap {
        target_id: target_id.ok_or_else(|| missing("target_id"))?,
        altitude_agl: altitude_agl.ok_or_else(|| missing("altitude_agl"))?,
        extent_half: extent_half.ok_or_else(|| missing("extent_half"))?,
        resolution,
        values,
        center_x: center_x.ok_or_else(|| missing("center_x"))?,
        center_y: center_y.ok_or_else(|| missing("center_y"))?,
    })
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;

    /// Builds a map directly from row-major values for targeted tests.
    pub fn map_from_values(
        target_id: u32,
        altitude_agl: f64,
        extent_half: f64,
        resolution: usize,
        center: (f64, f64),
        values: Vec<u8>,
    ) -> VisibilityMap {
        assert_eq!(values.len(), resolution * resolution);
        VisibilityMap {
            target_id,
            altitude_agl,
            extent_half,
            resolution,
            values,
            center_x: center.0,
            center_y: center.1,
        }
    }

    /// All-ones or all-zeros map centered on the origin.
    pub fn uniform_map(value: u8, altitude_agl: f64, extent_half: f64, resolution: usize) -> VisibilityMap {
        map_from_values(
            0,
            altitude_agl,
            extent_half,
            resolution,
            (0.0, 0.0),
            vec![value; resolution * resolution],
        )
    }
}
