use crate::error::{Error, Result};
use crate::tensor::{FlowField, ScalarMap};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowError {
    /// Mean endpoint error in pixels.
    pub mean_epe: f64,
    /// Mean angular error between `(u, v, 1)` vectors, degrees.
    pub mean_angular_deg: f64,
}

/// Weighted mean endpoint and angular error between two flow fields.
/// Without a mask every pixel has weight 1.
pub fn endpoint_error(a: &FlowField, b: &FlowField, mask: Option<&ScalarMap>) -> Result<FlowError> {
    if !a.same_size(b) {
        return Err(Error::Argument("flow fields differ in size".into()));
    }
    if let Some(m) = mask {
        if m.width() != a.width() || m.height() != a.height() {
            return Err(Error::Argument("mask and flow differ in size".into()));
        }
        if m.values().iter().any(|w| !(0.0..=1.0).contains(w)) {
            return Err(Error::Argument("mask weights must lie in [0, 1]".into()));
        }
    }
    let (mut wsum, mut epe, mut ang) = (0.0, 0.0, 0.0);
    for i in 0..a.u().len() {
        let w = mask.map_or(1.0, |m| m.values()[i]);
        if w == 0.0 {
            continue;
        }
        let (u1, v1) = (a.u()[i] as f64, a.v()[i] as f64);
        let (u2, v2) = (b.u()[i] as f64, b.v()[i] as f64);
        epe += w * (u1 - u2).hypot(v1 - v2);
        let cos = (u1 * u2 + v1 * v2 + 1.0) / ((u1 * u1 + v1 * v1 + 1.0) * (u2 * u2 + v2 * v2 + 1.0)).sqrt();
        ang += w * cos.clamp(-1.0, 1.0).acos().to_degrees();
        wsum += w;
    }
    if wsum == 0.0 {
        return Err(Error::Argument("mask selects no pixels".into()));
    }
    Ok(FlowError {
        mean_epe: epe / wsum,
        mean_angular_deg: ang / wsum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_fields() {
        let f = FlowField::uniform(4, 4, 1.5, -0.5);
        let e = endpoint_error(&f, &f, None).unwrap();
        assert_eq!(e.mean_epe, 0.0);
        assert!(e.mean_angular_deg.abs() < 1e-6);
    }

    #[test]
    fn orthogonal_constant_fields() {
        let a = FlowField::uniform(3, 3, 1.0, 0.0);
        let b = FlowField::uniform(3, 3, 0.0, 1.0);
        let e = endpoint_error(&a, &b, None).unwrap();
        assert!((e.mean_epe - 2f64.sqrt()).abs() < 1e-12);
        // cos = 1 / 2
        assert!((e.mean_angular_deg - 60.0).abs() < 1e-9);
    }

    #[test]
    fn single_outlier_pixel() {
        let a = FlowField::uniform(10, 10, 2.0, 0.0);
        let b = FlowField::from_fn(10, 10, |x, y| if (x, y) == (3, 7) { (2.0, 1.0) } else { (2.0, 0.0) });
        let e = endpoint_error(&a, &b, Some(&ScalarMap::filled(10, 10, 1.0))).unwrap();
        assert!((e.mean_epe - 0.01).abs() < 1e-12);
    }

    #[test]
    fn empty_mask_rejected() {
        let a = FlowField::zeros(2, 2);
        assert!(endpoint_error(&a, &a, Some(&ScalarMap::filled(2, 2, 0.0))).is_err());
    }
}
