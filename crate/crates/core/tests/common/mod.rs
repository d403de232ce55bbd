#![allow(dead_code)]

use rand::Rng;

use qa3c::sim::{CircuitProgram, GateKind};

/// Random program over the H/RY/RZ/CNOT/ROT gate set with `len` gates.
pub fn random_program<R: Rng>(rng: &mut R, n: usize, len: usize) -> (CircuitProgram, Vec<f64>) {
    let mut p = CircuitProgram::new(n).unwrap();
    for _ in 0..len {
        let q = rng.gen_range(0..n);
        let kind = match rng.gen_range(0..5) {
            0 => GateKind::H,
            1 => GateKind::Ry,
            2 => GateKind::Rz,
            3 if n > 1 => GateKind::Cnot,
            _ => GateKind::Rot,
        };
        let control = (kind == GateKind::Cnot).then(|| (q + rng.gen_range(1..n)) % n);
        p.push(kind, q, control, rng.gen()).unwrap();
    }
    let angles = (0..p.n_slots())
        .map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI) * 2.0)
        .collect();
    (p, angles)
}

/// Independent scalar Acrobot: the same equations of motion written out
/// longhand, four explicit RK4 stages, no arrays.
pub fn acrobot_rk4_scalar(t1: f64, t2: f64, w1: f64, w2: f64, tau: f64) -> (f64, f64, f64, f64) {
    let pi = std::f64::consts::PI;
    let f = |t1: f64, t2: f64, w1: f64, w2: f64| -> (f64, f64, f64, f64) {
        let (m1, m2, l1, lc1, lc2, i1, i2, g) = (1.0, 1.0, 1.0, 0.5, 0.5, 1.0, 1.0, 9.8);
        let d1 = m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2 + 2.0 * l1 * lc2 * t2.cos()) + i1 + i2;
        let d2 = m2 * (lc2 * lc2 + l1 * lc2 * t2.cos()) + i2;
        let phi2 = m2 * lc2 * g * (t1 + t2 - pi / 2.0).cos();
        let phi1 = -m2 * l1 * lc2 * w2 * w2 * t2.sin() - 2.0 * m2 * l1 * lc2 * w2 * w1 * t2.sin()
            + (m1 * lc1 + m2 * l1) * g * (t1 - pi / 2.0).cos()
            + phi2;
        let a2 = (tau + d2 / d1 * phi1 - m2 * l1 * lc2 * w1 * w1 * t2.sin() - phi2)
            / (m2 * lc2 * lc2 + i2 - d2 * d2 / d1);
        let a1 = -(d2 * a2 + phi1) / d1;
        (w1, w2, a1, a2)
    };
    let h = 0.2;
    let k1 = f(t1, t2, w1, w2);
    let k2 = f(t1 + h / 2.0 * k1.0, t2 + h / 2.0 * k1.1, w1 + h / 2.0 * k1.2, w2 + h / 2.0 * k1.3);
    let k3 = f(t1 + h / 2.0 * k2.0, t2 + h / 2.0 * k2.1, w1 + h / 2.0 * k2.2, w2 + h / 2.0 * k2.3);
    let k4 = f(t1 + h * k3.0, t2 + h * k3.1, w1 + h * k3.2, w2 + h * k3.3);
    let s = |x: f64, a: f64, b: f64, c: f64, d: f64| x + h / 6.0 * (a + 2.0 * b + 2.0 * c + d);
    let wrap = |x: f64| (x + pi).rem_euclid(2.0 * pi) - pi;
    (
        wrap(s(t1, k1.0, k2.0, k3.0, k4.0)),
        wrap(s(t2, k1.1, k2.1, k3.1, k4.1)),
        s(w1, k1.2, k2.2, k3.2, k4.2).clamp(-4.0 * pi, 4.0 * pi),
        s(w2, k1.3, k2.3, k3.3, k4.3).clamp(-9.0 * pi, 9.0 * pi),
    )
}

/// Flood fill over a 9×9 grid given as `wall[row][col]`.
pub fn flood_reachable(wall: &[[bool; 9]; 9], start: (usize, usize), goal: (usize, usize)) -> bool {
    let mut seen = [[false; 9]; 9];
    let mut stack = vec![start];
    seen[start.1][start.0] = true;
    while let Some((c, r)) = stack.pop() {
        if (c, r) == goal {
            return true;
        }
        let around = [(c + 1, r), (c.wrapping_sub(1), r), (c, r + 1), (c, r.wrapping_sub(1))];
        for (nc, nr) in around {
            if nc < 9 && nr < 9 && !wall[nr][nc] && !seen[nr][nc] {
                seen[nr][nc] = true;
                stack.push((nc, nr));
            }
        }
    }
    false
}

/// Least-squares slope of `ys` against `0..ys.len()`.
pub fn ls_slope(ys: &[f64]) -> f64 {
    let n = ys.len() as f64;
    let mx = (n - 1.0) / 2.0;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, y) in ys.iter().enumerate() {
        let dx = i as f64 - mx;
        sxy += dx * (y - my);
        sxx += dx * dx;
    }
    sxy / sxx
}
