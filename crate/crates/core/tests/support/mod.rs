//! Reference implementations shared by the integration and acceptance tests.
//! Nothing here calls the library's intersection, combination, loss, or
//! forward-pass code.

#![allow(dead_code)]

use lidar_cfe::geometry::{ObstacleShape, Point2};
use rand::Rng;

/// Signed distance from `p` to a shape: negative inside, zero on the boundary.
pub fn sdf(shape: &ObstacleShape, p: (f64, f64)) -> f64 {
    match shape {
        ObstacleShape::Circle(c) => ((p.0 - c.center.x).powi(2) + (p.1 - c.center.y).powi(2)).sqrt() - c.radius,
        ObstacleShape::Rectangle(r) => {
            let (s, co) = r.orientation.sin_cos();
            let (dx, dy) = (p.0 - r.center.x, p.1 - r.center.y);
            let qx = (co * dx + s * dy).abs() - r.half_extents.0;
            let qy = (-s * dx + co * dy).abs() - r.half_extents.1;
            let outside = (qx.max(0.0).powi(2) + qy.max(0.0).powi(2)).sqrt();
            outside + qx.max(qy).min(0.0)
        }
    }
}

pub fn scene_sdf(shapes: &[ObstacleShape], p: (f64, f64)) -> f64 {
    shapes.iter().map(|s| sdf(s, p)).fold(f64::INFINITY, f64::min)
}

/// Fixed-step ray march from the origin. Between grid points closer to a
/// surface than one step, the gap is sphere-traced so thin corner clips are
/// not stepped over; far from surfaces whole steps are skipped.
pub fn march(shapes: &[ObstacleShape], heading: f64, max_range: f64, step: f64) -> f64 {
    let (dy, dx) = heading.sin_cos();
    let at = |t: f64| (t * dx, t * dy);
    let mut t = 0.0;
    while t <= max_range {
        let s = scene_sdf(shapes, at(t));
        if s <= 0.0 {
            return t;
        }
        if s < step {
            let mut u = t;
            for _ in 0..100_000 {
                let su = scene_sdf(shapes, at(u));
                if su <= 1e-9 {
                    return u.min(max_range);
                }
                u += su;
                if u >= t + step {
                    break;
                }
            }
            t += step;
        } else {
            t += step * (s / step).floor();
        }
    }
    max_range
}

/// Random circle or rectangle with center in `[-extent, extent]²` and sizes
/// in `[0.05, 1.0]`.
pub fn random_shape<R: Rng>(rng: &mut R, extent: f64) -> ObstacleShape {
    let center = Point2::new(rng.random_range(-extent..extent), rng.random_range(-extent..extent));
    if rng.random_bool(0.5) {
        ObstacleShape::circle(center, rng.random_range(0.05..1.0)).unwrap()
    } else {
        let half = (rng.random_range(0.05..1.0), rng.random_range(0.05..1.0));
        ObstacleShape::rectangle(center, rng.random_range(0.0..std::f64::consts::PI), half).unwrap()
    }
}

/// Up to `max_shapes` random shapes, none touching a small disk around the
/// sensor.
pub fn random_scene<R: Rng>(rng: &mut R, max_shapes: usize, extent: f64) -> Vec<ObstacleShape> {
    let n = rng.random_range(1..=max_shapes);
    let mut shapes = Vec::with_capacity(n);
    while shapes.len() < n {
        let s = random_shape(rng, extent);
        if sdf(&s, (0.0, 0.0)) > 0.05 {
            shapes.push(s);
        }
    }
    shapes
}

/// Hinge loss written straight from the piecewise definition.
pub fn hinge_oracle(action: &[f64], bounds: &[[f64; 2]]) -> f64 {
    let mut total = 0.0;
    for i in 0..action.len() {
        let (y, lo, hi) = (action[i], bounds[i][0], bounds[i][1]);
        let term = if y >= lo && y <= hi {
            0.0
        } else {
            let a = (y - lo).abs();
            let b = (y - hi).abs();
            if a < b {
                a
            } else {
                b
            }
        };
        total += term;
    }
    total
}

pub enum NaiveLayer {
    Conv { w: Vec<Vec<Vec<f64>>>, b: Vec<f64>, stride: usize, padding: usize, circular: bool },
    Dense { w: Vec<Vec<f64>>, b: Vec<f64> },
    Relu,
    Tanh,
}

/// Forward pass by the textbook definitions on nested vectors. The input is
/// `lidar` as a single channel followed by `extra` appended after flattening.
pub fn naive_forward(layers: &[NaiveLayer], lidar: &[f64], extra: &[f64]) -> Vec<f64> {
    let mut channels: Option<Vec<Vec<f64>>> = Some(vec![lidar.to_vec()]);
    let mut flat: Vec<f64> = Vec::new();
    for layer in layers {
        match layer {
            NaiveLayer::Conv { w, b, stride, padding, circular } => {
                let x = channels.as_ref().expect("conv after flatten");
                let len = x[0].len() as isize;
                let k = w[0][0].len() as isize;
                let out_len = (len + 2 * *padding as isize - k) / *stride as isize + 1;
                let mut y = vec![vec![0.0; out_len as usize]; w.len()];
                for o in 0..w.len() {
                    for j in 0..out_len {
                        let mut acc = b[o];
                        for c in 0..x.len() {
                            for m in 0..k {
                                let pos = j * *stride as isize + m - *padding as isize;
                                let v = if pos >= 0 && pos < len {
                                    x[c][pos as usize]
                                } else if *circular {
                                    x[c][pos.rem_euclid(len) as usize]
                                } else {
                                    0.0
                                };
                                acc += w[o][c][m as usize] * v;
                            }
                        }
                        y[o][j as usize] = acc;
                    }
                }
                channels = Some(y);
            }
            NaiveLayer::Dense { w, b } => {
                if let Some(x) = channels.take() {
                    flat = x.concat();
                    flat.extend_from_slice(extra);
                }
                flat = w.iter().zip(b).map(|(row, bias)| bias + row.iter().zip(&flat).map(|(a, v)| a * v).sum::<f64>()).collect();
            }
            NaiveLayer::Relu => match channels.as_mut() {
                Some(x) => x.iter_mut().flatten().for_each(|v| *v = v.max(0.0)),
                None => flat.iter_mut().for_each(|v| *v = v.max(0.0)),
            },
            NaiveLayer::Tanh => match channels.as_mut() {
                Some(x) => x.iter_mut().flatten().for_each(|v| *v = v.tanh()),
                None => flat.iter_mut().for_each(|v| *v = v.tanh()),
            },
        }
    }
    match channels {
        Some(x) => {
            let mut v = x.concat();
            v.extend_from_slice(extra);
            v
        }
        None => flat,
    }
}
