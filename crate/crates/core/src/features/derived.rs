use crate::signal::{differentiate_segments, magnitude, Trial};

/// Every signal derived from a trial that the catalog reads.
pub(crate) struct Derived<'a> {
    pub trial: &'a Trial,
    pub segments: Vec<usize>,
    /// Sample period in seconds.
    pub h: f64,
    /// Active task time T.
    pub duration: f64,
    /// Velocity, acceleration and jerk of x, y, z.
    pub vel: [Vec<f64>; 3],
    pub acc: [Vec<f64>; 3],
    pub jerk: [Vec<f64>; 3],
    /// Velocity and jerk of roll, pitch, yaw.
    pub ang_vel: [Vec<f64>; 3],
    pub ang_jerk: [Vec<f64>; 3],
    pub force_vel: Vec<f64>,
    pub force_acc: Vec<f64>,
    pub force_jerk: Vec<f64>,
    pub speed: Vec<f64>,
    pub acc_mag: Vec<f64>,
}

fn chain(x: &[f64], segments: &[usize], h: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let v = differentiate_segments(x, segments, h, 1);
    let a = differentiate_segments(&v, segments, h, 1);
    let j = differentiate_segments(&a, segments, h, 1);
    (v, a, j)
}

impl<'a> Derived<'a> {
    /// The trial must already be validated.
    pub fn new(trial: &'a Trial) -> Self {
        let segments = trial.segment_lengths();
        let h = 1.0 / trial.sample_rate_hz;
        let duration = trial.duration_s();
        let [px, py, pz] = &trial.position;
        let (vx, ax, jx) = chain(&px.samples, &segments, h);
        let (vy, ay, jy) = chain(&py.samples, &segments, h);
        let (vz, az, jz) = chain(&pz.samples, &segments, h);
        let [roll, pitch, yaw] = &trial.angles;
        let (vr, _, jr) = chain(&roll.samples, &segments, h);
        let (vp, _, jp) = chain(&pitch.samples, &segments, h);
        let (vyw, _, jyw) = chain(&yaw.samples, &segments, h);
        let (vf, af, jf) = chain(&trial.force.samples, &segments, h);
        let speed = magnitude(&vx, &vy, &vz);
        let acc_mag = magnitude(&ax, &ay, &az);
        Derived {
            trial,
            segments,
            h,
            duration,
            vel: [vx, vy, vz],
            acc: [ax, ay, az],
            jerk: [jx, jy, jz],
            ang_vel: [vr, vp, vyw],
            ang_jerk: [jr, jp, jyw],
            force_vel: vf,
            force_acc: af,
            force_jerk: jf,
            speed,
            acc_mag,
        }
    }

    pub fn pos(&self, axis: usize) -> &[f64] {
        &self.trial.position[axis].samples
    }

    pub fn angle(&self, axis: usize) -> &[f64] {
        &self.trial.angles[axis].samples
    }

    pub fn force(&self) -> &[f64] {
        &self.trial.force.samples
    }

    /// Time of sample `i` divided by T.
    pub fn time_fraction(&self, i: usize) -> f64 {
        i as f64 * self.h / self.duration
    }
}
