//! Room geometry, reflecting planes, the transmit array lattice and the
//! first-order image-source construction.
//!
//! Every reflecting surface is an infinite plane in Hessian normal form
//! `n · x = offset`. Mirroring the transmit array across such a plane gives
//! an image array whose direct path to a receiver has the same length as the
//! physical specular path off that surface.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::GeometryError;

/// Planes closer than this to the array center are rejected as degenerate.
pub const DEGENERATE_PLANE_TOL_M: f64 = 1e-9;

/// A position or displacement in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Point3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, other: Point3) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for Point3 {
    fn from(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

impl fmt::Display for Point3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}, {}]", self.x, self.y, self.z)
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, rhs: Point3) -> Point3 {
        Point3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, rhs: Point3) -> Point3 {
        Point3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, s: f64) -> Point3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Point3 {
    type Output = Point3;
    fn neg(self) -> Point3 {
        Point3::new(-self.x, -self.y, -self.z)
    }
}

/// An infinite planar reflector with a complex amplitude reflection gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectingPlane {
    normal: Point3,
    offset: f64,
    gain: Complex64,
}

impl ReflectingPlane {
    /// Builds a plane through `anchor` with the given normal. The normal is
    /// normalized here; it only has to be nonzero.
    pub fn new(anchor: Point3, normal: Point3, gain: Complex64) -> Result<Self, GeometryError> {
        if !anchor.is_finite() || !normal.is_finite() {
            return Err(GeometryError::NonFinite("reflecting plane"));
        }
        let len = normal.norm();
        if len < 1e-12 {
            return Err(GeometryError::ZeroNormal);
        }
        if !(gain.re.is_finite() && gain.im.is_finite()) || gain.norm() > 1.0 + 1e-12 {
            return Err(GeometryError::ActiveReflector(gain.norm()));
        }
        let normal = normal * (1.0 / len);
        Ok(Self {
            normal,
            offset: normal.dot(anchor),
            gain,
        })
    }

    /// Reflection gain from a magnitude in dB (amplitude, `20 log10`) and a
    /// phase in radians.
    pub fn gain_from_db(gain_db: f64, phase_rad: f64) -> Complex64 {
        Complex64::from_polar(10f64.powf(gain_db / 20.0), phase_rad)
    }

    pub fn normal(&self) -> Point3 {
        self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn gain(&self) -> Complex64 {
        self.gain
    }

    /// Signed distance of `p` from the plane, positive on the normal side.
    pub fn signed_distance(&self, p: Point3) -> f64 {
        self.normal.dot(p) - self.offset
    }
}

/// Reflection of `p` across `plane`.
pub fn mirror_point(p: Point3, plane: &ReflectingPlane) -> Point3 {
    p - plane.normal * (2.0 * plane.signed_distance(p))
}

/// Orthonormal in-plane axes spanning the array lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeAxes {
    pub horizontal: Point3,
    pub vertical: Point3,
}

impl Default for LatticeAxes {
    /// Lattice in the xz-plane, broadside towards +y.
    fn default() -> Self {
        Self {
            horizontal: Point3::new(1.0, 0.0, 0.0),
            vertical: Point3::new(0.0, 0.0, 1.0),
        }
    }
}

/// Uniform rectangular array of isotropic elements.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    center: Point3,
    n_x: usize,
    n_z: usize,
    spacing: f64,
    axes: LatticeAxes,
    wavelength: f64,
}

impl ArrayGeometry {
    pub fn new(
        center: Point3,
        n_x: usize,
        n_z: usize,
        spacing: f64,
        wavelength: f64,
    ) -> Result<Self, GeometryError> {
        Self::with_axes(
            center,
            n_x,
            n_z,
            spacing,
            LatticeAxes::default(),
            wavelength,
        )
    }

    pub fn with_axes(
        center: Point3,
        n_x: usize,
        n_z: usize,
        spacing: f64,
        axes: LatticeAxes,
        wavelength: f64,
    ) -> Result<Self, GeometryError> {
        if n_x == 0 || n_z == 0 {
            return Err(GeometryError::EmptyArray);
        }
        if !center.is_finite() {
            return Err(GeometryError::NonFinite("array center"));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(GeometryError::NonPositive("element spacing", spacing));
        }
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(GeometryError::NonPositive("wavelength", wavelength));
        }
        let h = axes.horizontal.norm();
        let v = axes.vertical.norm();
        if (h - 1.0).abs() > 1e-12
            || (v - 1.0).abs() > 1e-12
            || axes.horizontal.dot(axes.vertical).abs() > 1e-12
        {
            return Err(GeometryError::NonOrthonormalAxes);
        }
        Ok(Self {
            center,
            n_x,
            n_z,
            spacing,
            axes,
            wavelength,
        })
    }

    pub fn center(&self) -> Point3 {
        self.center
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_z(&self) -> usize {
        self.n_z
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn axes(&self) -> LatticeAxes {
        self.axes
    }

    /// Number of elements `L`.
    pub fn len(&self) -> usize {
        self.n_x * self.n_z
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Physical extent along the horizontal lattice axis, `N_x * spacing`.
    pub fn width(&self) -> f64 {
        self.n_x as f64 * self.spacing
    }

    pub fn height(&self) -> f64 {
        self.n_z as f64 * self.spacing
    }

    /// Element positions, horizontal index running fastest.
    pub fn element_positions(&self) -> Vec<Point3> {
        let half_x = (self.n_x as f64 - 1.0) / 2.0;
        let half_z = (self.n_z as f64 - 1.0) / 2.0;
        let mut out = Vec::with_capacity(self.len());
        for iz in 0..self.n_z {
            let dz = (iz as f64 - half_z) * self.spacing;
            for ix in 0..self.n_x {
                let dx = (ix as f64 - half_x) * self.spacing;
                out.push(self.center + self.axes.horizontal * dx + self.axes.vertical * dz);
            }
        }
        out
    }
}

/// The physical array (line of sight) or one of its mirror images.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageSource {
    pub index: usize,
    pub positions: Vec<Point3>,
    pub gain: Complex64,
    pub is_los: bool,
}

impl ImageSource {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Centroid of the element positions.
    pub fn center(&self) -> Point3 {
        let n = self.positions.len().max(1) as f64;
        self.positions
            .iter()
            .fold(Point3::ORIGIN, |acc, &p| acc + p)
            * (1.0 / n)
    }
}

/// Line-of-sight source followed by one first-order image per plane, in
/// plane order.
pub fn build_image_sources(
    array: &ArrayGeometry,
    planes: &[ReflectingPlane],
) -> Result<Vec<ImageSource>, GeometryError> {
    let positions = array.element_positions();
    let mut sources = Vec::with_capacity(planes.len() + 1);
    sources.push(ImageSource {
        index: 0,
        positions: positions.clone(),
        gain: Complex64::new(1.0, 0.0),
        is_los: true,
    });
    for (i, plane) in planes.iter().enumerate() {
        let d = plane.signed_distance(array.center()).abs();
        if d < DEGENERATE_PLANE_TOL_M {
            return Err(GeometryError::PlaneThroughArray {
                plane: i,
                distance: d,
            });
        }
        sources.push(ImageSource {
            index: i + 1,
            positions: positions.iter().map(|&p| mirror_point(p, plane)).collect(),
            gain: plane.gain(),
            is_los: false,
        });
    }
    Ok(sources)
}

/// Faces of an axis-aligned box room.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoomSurface {
    WallXMin,
    WallXMax,
    WallYMin,
    WallYMax,
    Floor,
    Ceiling,
}

impl RoomSurface {
    pub const ALL: [RoomSurface; 6] = [
        RoomSurface::WallXMin,
        RoomSurface::WallXMax,
        RoomSurface::WallYMin,
        RoomSurface::WallYMax,
        RoomSurface::Floor,
        RoomSurface::Ceiling,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RoomSurface::WallXMin => "wall_x_min",
            RoomSurface::WallXMax => "wall_x_max",
            RoomSurface::WallYMin => "wall_y_min",
            RoomSurface::WallYMax => "wall_y_max",
            RoomSurface::Floor => "floor",
            RoomSurface::Ceiling => "ceiling",
        }
    }
}

/// Axis-aligned box room given by two opposite corners.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Room {
    pub min: Point3,
    pub max: Point3,
}

impl Room {
    pub fn new(min: Point3, max: Point3) -> Result<Self, GeometryError> {
        if !min.is_finite() || !max.is_finite() {
            return Err(GeometryError::NonFinite("room corner"));
        }
        if !(max.x > min.x && max.y > min.y && max.z > min.z) {
            return Err(GeometryError::EmptyRoom);
        }
        Ok(Self { min, max })
    }

    pub fn dimensions(&self) -> Point3 {
        self.max - self.min
    }

    pub fn contains(&self, p: Point3) -> bool {
        (self.min.x..=self.max.x).contains(&p.x)
            && (self.min.y..=self.max.y).contains(&p.y)
            && (self.min.z..=self.max.z).contains(&p.z)
    }

    /// Plane of one face, normal pointing into the room.
    pub fn surface_plane(
        &self,
        surface: RoomSurface,
        gain: Complex64,
    ) -> Result<ReflectingPlane, GeometryError> {
        let (anchor, normal) = match surface {
            RoomSurface::WallXMin => (self.min, Point3::new(1.0, 0.0, 0.0)),
            RoomSurface::WallXMax => (self.max, Point3::new(-1.0, 0.0, 0.0)),
            RoomSurface::WallYMin => (self.min, Point3::new(0.0, 1.0, 0.0)),
            RoomSurface::WallYMax => (self.max, Point3::new(0.0, -1.0, 0.0)),
            RoomSurface::Floor => (self.min, Point3::new(0.0, 0.0, 1.0)),
            RoomSurface::Ceiling => (self.max, Point3::new(0.0, 0.0, -1.0)),
        };
        ReflectingPlane::new(anchor, normal, gain)
    }
}
