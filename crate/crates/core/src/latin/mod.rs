//! Rectangles, points and lines, plus exact verifiers.

mod point;
mod rectangle;
mod verify;

pub use point::{line_members, LineClass, LineId, Point};
pub use rectangle::{LatinRectangle, RectangleJson, Shape};
pub use verify::{
    extract_transversals, verify_latin, verify_orthogonal, PartialTransversal, Violation,
    VerifyReport,
};
