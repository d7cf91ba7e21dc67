use serde::{Deserialize, Serialize};

pub const STATE_DIM: usize = 12;

/// Column labels used by reports and CSV output, in the same order as
/// [`State12::to_array`].
pub const STATE_LABELS: [&str; STATE_DIM] = [
    "x", "y", "z", "psi", "theta", "phi", "vx", "vy", "vz", "wx", "wy", "wz",
];

/// Rigid-body state. Position is inertial; linear velocity and angular rate are
/// body-frame. Euler angles follow the yaw-pitch-roll (ZYX) convention.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State12 {
    pub x: f64, // m, inertial
    pub y: f64, // m, inertial
    pub z: f64, // m, inertial
    pub psi: f64,   // rad, yaw
    pub theta: f64, // rad, pitch
    pub phi: f64,   // rad, roll
    pub vx: f64, // m/s, body
    pub vy: f64, // m/s, body
    pub vz: f64, // m/s, body
    pub wx: f64, // rad/s, body
    pub wy: f64, // rad/s, body
    pub wz: f64, // rad/s, body
}

impl State12 {
    pub const fn zero() -> Self {
        State12 {
            x: 0.0,
            y: 0.0,
            z: 0.0,
            psi: 0.0,
            theta: 0.0,
            phi: 0.0,
            vx: 0.0,
            vy: 0.0,
            vz: 0.0,
            wx: 0.0,
            wy: 0.0,
            wz: 0.0,
        }
    }

    pub fn from_array(a: [f64; STATE_DIM]) -> Self {
        State12 {
            x: a[0],
            y: a[1],
            z: a[2],
            psi: a[3],
            theta: a[4],
            phi: a[5],
            vx: a[6],
            vy: a[7],
            vz: a[8],
            wx: a[9],
            wy: a[10],
            wz: a[11],
        }
    }

    pub fn to_array(self) -> [f64; STATE_DIM] {
        [
            self.x, self.y, self.z, self.psi, self.theta, self.phi, self.vx, self.vy, self.vz,
            self.wx, self.wy, self.wz,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// `self + scale * rate`, the elementwise update used by the integrators.
    pub fn add_scaled(&self, rate: &State12, scale: f64) -> State12 {
        let a = self.to_array();
        let r = rate.to_array();
        let mut out = [0.0; STATE_DIM];
        for i in 0..STATE_DIM {
            out[i] = a[i] + scale * r[i];
        }
        State12::from_array(out)
    }
}

/// Commanded thruster forces in newtons, one per corner. Thruster 1 sits at
/// (+x, +y), and 2..4 continue counterclockwise: 2 at (-x, +y), 3 at (-x, -y),
/// 4 at (+x, -y).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ThrusterCommand {
    pub f1: f64, // N
    pub f2: f64, // N
    pub f3: f64, // N
    pub f4: f64, // N
}

impl ThrusterCommand {
    pub const fn uniform(f: f64) -> Self {
        ThrusterCommand {
            f1: f,
            f2: f,
            f3: f,
            f4: f,
        }
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        ThrusterCommand {
            f1: a[0],
            f2: a[1],
            f3: a[2],
            f4: a[3],
        }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.f1, self.f2, self.f3, self.f4]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// Clamp each force into `[0, f_max]`. Returns the clamped command and
    /// whether anything was out of range.
    pub fn clamped(&self, f_max: f64) -> (ThrusterCommand, bool) {
        let a = self.to_array();
        let mut out = [0.0; 4];
        let mut touched = false;
        for i in 0..4 {
            out[i] = a[i].clamp(0.0, f_max);
            if out[i] != a[i] {
                touched = true;
            }
        }
        (ThrusterCommand::from_array(out), touched)
    }
}
