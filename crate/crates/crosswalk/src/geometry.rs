//! Axis-aligned 2D geometry: the road plane uses x along the corridor and y
//! across it (0 at the bottom road edge).

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Rect {
    /// Euclidean distance from a point to the closest point of the
    /// rectangle; zero when the point is inside.
    pub fn distance_to_point(&self, x: f64, y: f64) -> f64 {
        let dx = (self.min_x - x).max(0.0).max(x - self.max_x);
        let dy = (self.min_y - y).max(0.0).max(y - self.max_y);
        (dx * dx + dy * dy).sqrt()
    }

    /// Disc-rectangle intersection with a strict inequality: touching at
    /// exactly the radius does not count.
    pub fn intersects_disc(&self, x: f64, y: f64, radius: f64) -> bool {
        self.distance_to_point(x, y) < radius
    }
}
