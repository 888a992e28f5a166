//! Small numerical helpers shared across modules.

/// First-order low-pass filter advanced with the exact exponential step, so
/// it is unconditionally stable for any step size.
#[derive(Debug, Clone)]
pub struct LowPass {
    pub bandwidth: f64,
    state: f64,
    primed: bool,
}

impl LowPass {
    pub fn new(bandwidth: f64) -> Self {
        LowPass { bandwidth, state: 0.0, primed: false }
    }

    /// Seed the state with the first sample instead of relaxing from zero.
    pub fn update(&mut self, x: f64, dt: f64) -> f64 {
        if !self.primed {
            self.state = x;
            self.primed = true;
        } else {
            let a = (-self.bandwidth * dt).exp();
            self.state = x + (self.state - x) * a;
        }
        self.state
    }

    pub fn value(&self) -> f64 {
        self.state
    }
}

/// Continuous-time rational section up to second order,
/// `H(s) = (b2 s² + b1 s + b0) / (a2 s² + a1 s + a0)`,
/// discretized by the bilinear transform with optional frequency prewarping.
///
/// The state is kept in transposed direct form II, one instance per axis.
#[derive(Debug, Clone)]
pub struct BilinearSection {
    // discrete coefficients, a0 normalized to 1
    b: [f64; 3],
    a: [f64; 3],
    z: [f64; 2],
}

impl BilinearSection {
    /// `prewarp`: match the continuous response exactly at this frequency
    /// (rad/s); pass `None` for the plain trapezoidal mapping.
    ///
    /// A section whose numerator and denominator are both first order is
    /// realized as a first-order discrete filter, so no parasitic state at
    /// the Nyquist frequency is introduced.
    pub fn new(num: [f64; 3], den: [f64; 3], dt: f64, prewarp: Option<f64>) -> Self {
        let k = match prewarp {
            Some(w) if w > 0.0 => w / (w * dt / 2.0).tan(),
            _ => 2.0 / dt,
        };
        let (b0, b1, b2) = (num[0], num[1], num[2]);
        let (a0, a1, a2) = (den[0], den[1], den[2]);
        if b2 == 0.0 && a2 == 0.0 {
            // substitute s = k (z-1)/(z+1) into a first-order section
            let bz0 = b1 * k + b0;
            let bz1 = -b1 * k + b0;
            let az0 = a1 * k + a0;
            let az1 = -a1 * k + a0;
            return BilinearSection {
                b: [bz0 / az0, bz1 / az0, 0.0],
                a: [1.0, az1 / az0, 0.0],
                z: [0.0, 0.0],
            };
        }
        // substitute s = k (z-1)/(z+1) and collect powers of z
        let k2 = k * k;
        let bz0 = b2 * k2 + b1 * k + b0;
        let bz1 = -2.0 * b2 * k2 + 2.0 * b0;
        let bz2 = b2 * k2 - b1 * k + b0;
        let az0 = a2 * k2 + a1 * k + a0;
        let az1 = -2.0 * a2 * k2 + 2.0 * a0;
        let az2 = a2 * k2 - a1 * k + a0;
        BilinearSection {
            b: [bz0 / az0, bz1 / az0, bz2 / az0],
            a: [1.0, az1 / az0, az2 / az0],
            z: [0.0, 0.0],
        }
    }

    pub fn step(&mut self, x: f64) -> f64 {
        let y = self.b[0] * x + self.z[0];
        self.z[0] = self.b[1] * x - self.a[1] * y + self.z[1];
        self.z[1] = self.b[2] * x - self.a[2] * y;
        y
    }

    pub fn reset(&mut self) {
        self.z = [0.0, 0.0];
    }

    /// Frequency response of the discrete section at `omega` rad/s for a
    /// sample period `dt`.
    pub fn response(&self, omega: f64, dt: f64) -> num_complex::Complex64 {
        use num_complex::Complex64 as C;
        let zi = C::from_polar(1.0, -omega * dt); // z^-1
        let num = C::new(self.b[0], 0.0) + zi * (self.b[1] + zi * self.b[2]);
        let den = C::new(1.0, 0.0) + zi * (self.a[1] + zi * self.a[2]);
        num / den
    }
}

/// Unwrap a phase increment into (-π, π].
pub fn wrap_angle(mut a: f64) -> f64 {
    use std::f64::consts::PI;
    while a > PI {
        a -= 2.0 * PI;
    }
    while a <= -PI {
        a += 2.0 * PI;
    }
    a
}

/// Complex amplitude of the component of `samples` at angular frequency
/// `omega`, assuming uniform sampling at `dt` starting at time `t0`.
///
/// Returns the amplitude-and-phase phasor `X` such that the signal contains
/// `Re{X e^{jωt}}`. The window should span an integer number of periods.
pub fn single_bin_projection(samples: &[f64], dt: f64, t0: f64, omega: f64) -> num_complex::Complex64 {
    use num_complex::Complex64 as C;
    let mut acc = C::new(0.0, 0.0);
    for (k, &x) in samples.iter().enumerate() {
        let t = t0 + k as f64 * dt;
        acc += C::from_polar(1.0, -omega * t) * x;
    }
    acc * (2.0 / samples.len() as f64)
}

/// Map `f` over `items` with a bounded worker pool. The pool size honors the
/// `UVOC_THREADS` environment variable when set, otherwise the available
/// parallelism. Output order matches input order.
pub fn parallel_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync,
{
    let workers = std::env::var("UVOC_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        });
    let n = items.len();
    if workers <= 1 || n <= 1 {
        return items.into_iter().map(f).collect();
    }

    let inputs: Vec<std::sync::Mutex<Option<T>>> =
        items.into_iter().map(|t| std::sync::Mutex::new(Some(t))).collect();
    let outputs: Vec<std::sync::Mutex<Option<U>>> =
        (0..n).map(|_| std::sync::Mutex::new(None)).collect();
    let next = std::sync::atomic::AtomicUsize::new(0);
    let f = &f;

    std::thread::scope(|scope| {
        for _ in 0..workers.min(n) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                if i >= n {
                    break;
                }
                let item = inputs[i].lock().unwrap().take().unwrap();
                *outputs[i].lock().unwrap() = Some(f(item));
            });
        }
    });

    outputs.into_iter().map(|m| m.into_inner().unwrap().unwrap()).collect()
}
