//! C ABI surface (placeholder while the engine is built).
