pub mod linalg;
pub mod poly;
pub mod ring;
pub mod families;
pub mod divisibility;
pub mod certify;
pub mod splitting;
pub mod table;
