//! Oriented 3D boxes shared by proposals, pooling, and metrics.

/// Wrap an angle into (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = 2.0 * core::f64::consts::PI;
    let mut r = libm::fmod(a, two_pi);
    if r <= -core::f64::consts::PI {
        r += two_pi;
    } else if r > core::f64::consts::PI {
        r -= two_pi;
    }
    r
}

/// An oriented box: center, size `(l, w, h)`, yaw about +z.
///
/// `l` extends along the box x axis (heading), `w` along y, `h` along z.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Box3D {
    pub center: [f64; 3],
    pub size: [f64; 3],
    pub yaw: f64,
}

impl Box3D {
    pub fn new(center: [f64; 3], size: [f64; 3], yaw: f64) -> Self {
        Self {
            center,
            size,
            yaw: wrap_angle(yaw),
        }
    }

    /// Box-local -> world.
    pub fn from_local(&self, local: [f64; 3]) -> [f64; 3] {
        let (s, c) = (libm::sin(self.yaw), libm::cos(self.yaw));
        [
            self.center[0] + c * local[0] - s * local[1],
            self.center[1] + s * local[0] + c * local[1],
            self.center[2] + local[2],
        ]
    }

    /// World -> box-local.
    pub fn to_local(&self, world: [f64; 3]) -> [f64; 3] {
        let dx = world[0] - self.center[0];
        let dy = world[1] - self.center[1];
        let dz = world[2] - self.center[2];
        let (s, c) = (libm::sin(self.yaw), libm::cos(self.yaw));
        [c * dx + s * dy, -s * dx + c * dy, dz]
    }

    /// True when the point lies inside the box (half-open on nothing; all
    /// faces inclusive).
    pub fn contains(&self, world: [f64; 3]) -> bool {
        let l = self.to_local(world);
        libm::fabs(l[0]) <= self.size[0] / 2.0
            && libm::fabs(l[1]) <= self.size[1] / 2.0
            && libm::fabs(l[2]) <= self.size[2] / 2.0
    }

    /// The four BEV footprint corners, counter-clockwise.
    pub fn bev_corners(&self) -> [[f64; 2]; 4] {
        let hl = self.size[0] / 2.0;
        let hw = self.size[1] / 2.0;
        let locals = [[hl, hw], [-hl, hw], [-hl, -hw], [hl, -hw]];
        let (s, c) = (libm::sin(self.yaw), libm::cos(self.yaw));
        let mut out = [[0.0; 2]; 4];
        for (o, l) in out.iter_mut().zip(locals.iter()) {
            o[0] = self.center[0] + c * l[0] - s * l[1];
            o[1] = self.center[1] + s * l[0] + c * l[1];
        }
        out
    }

    pub fn bev_area(&self) -> f64 {
        self.size[0] * self.size[1]
    }

    pub fn volume(&self) -> f64 {
        self.size[0] * self.size[1] * self.size[2]
    }

    /// Vertical extent `[z_min, z_max]`.
    pub fn z_interval(&self) -> [f64; 2] {
        [
            self.center[2] - self.size[2] / 2.0,
            self.center[2] + self.size[2] / 2.0,
        ]
    }
}
