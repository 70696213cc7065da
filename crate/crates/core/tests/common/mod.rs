//! Adaptive-Simpson quadrature and a Lloyd iteration built on it, used as an
//! oracle for the closed-form Lloyd-Max design.

pub fn phi(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    (b - a) / 6.0 * (f(a) + 4.0 * f(c) + f(b))
}

fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let c = 0.5 * (a + b);
    let left = simpson(f, a, c);
    let right = simpson(f, c, b);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        return left + right + (left + right - whole) / 15.0;
    }
    adaptive(f, a, c, left, tol / 2.0, depth - 1) + adaptive(f, c, b, right, tol / 2.0, depth - 1)
}

/// `∫_a^b f` by adaptive Simpson; infinite ends are cut at ±12.
fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (a, b) = (a.max(-12.0), b.min(12.0));
    if b <= a {
        return 0.0;
    }
    adaptive(f, a, b, simpson(f, a, b), 1e-14, 50)
}

/// Lloyd iteration with every cell moment obtained by quadrature. Returns
/// the levels and the distortion for a unit Gaussian.
pub fn quadrature_lloyd(bits: u32) -> (Vec<f64>, f64) {
    let levels_n = 1usize << bits;
    let mut levels: Vec<f64> = (0..levels_n).map(|i| -3.0 + 6.0 * (i as f64 + 0.5) / levels_n as f64).collect();
    for _ in 0..20_000 {
        let mut edges = vec![f64::NEG_INFINITY];
        edges.extend(levels.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        edges.push(f64::INFINITY);
        let next: Vec<f64> = edges
            .windows(2)
            .map(|e| integrate(&|x| x * phi(x), e[0], e[1]) / integrate(&phi, e[0], e[1]))
            .collect();
        let moved = next.iter().zip(&levels).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        levels = next;
        if moved < 1e-13 {
            break;
        }
    }
    let mut edges = vec![f64::NEG_INFINITY];
    edges.extend(levels.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    edges.push(f64::INFINITY);
    let dist = edges
        .windows(2)
        .zip(&levels)
        .map(|(e, &l)| integrate(&|x| (x - l) * (x - l) * phi(x), e[0], e[1]))
        .sum();
    (levels, dist)
}
