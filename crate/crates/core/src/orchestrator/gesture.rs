//! Servo action groups on a virtual clock.
//!
//! The rig has ten servos with ids 1..=10, each positioned in `[0, 240]`
//! degrees. A group is an ordered list of single-servo moves; executing it
//! always leaves the rig at the group's home pose.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SERVO_COUNT: usize = 10;
pub const MAX_ANGLE: f64 = 240.0;
/// Duration of each move appended to bring a servo back home.
pub const RETURN_MOVE_MS: u32 = 300;
pub const LIBRARY_SCHEMA_VERSION: u32 = 1;

pub type Pose = [f64; SERVO_COUNT];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GestureError {
    #[error("group {group:?} frame {frame}: unknown servo id {servo_id} (rig has 1..=10)")]
    UnknownServo { group: String, frame: usize, servo_id: u8 },
    #[error("group {group:?} frame {frame}: angle {angle} outside [0, 240]")]
    AngleOutOfRange { group: String, frame: usize, angle: f64 },
    #[error("group {group:?} frame {frame}: duration must be positive")]
    ZeroDuration { group: String, frame: usize },
    #[error("group {group:?}: home pose angle {angle} outside [0, 240]")]
    HomeOutOfRange { group: String, angle: f64 },
    #[error("unknown gesture {0:?}")]
    UnknownGesture(String),
    #[error("gesture library: {0}")]
    Library(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ServoFrame {
    pub servo_id: u8,
    pub angle_degrees: f64,
    pub duration_ms: u32,
}

impl ServoFrame {
    pub const fn new(servo_id: u8, angle_degrees: f64, duration_ms: u32) -> Self {
        Self {
            servo_id,
            angle_degrees,
            duration_ms,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GestureActionGroup {
    pub name: String,
    pub frames: Vec<ServoFrame>,
    pub home_pose: Pose,
}

impl GestureActionGroup {
    pub fn validate(&self) -> Result<(), GestureError> {
        for &angle in &self.home_pose {
            if !(0.0..=MAX_ANGLE).contains(&angle) {
                return Err(GestureError::HomeOutOfRange {
                    group: self.name.clone(),
                    angle,
                });
            }
        }
        for (i, f) in self.frames.iter().enumerate() {
            if !(1..=SERVO_COUNT as u8).contains(&f.servo_id) {
                return Err(GestureError::UnknownServo {
                    group: self.name.clone(),
                    frame: i,
                    servo_id: f.servo_id,
                });
            }
            if !(0.0..=MAX_ANGLE).contains(&f.angle_degrees) {
                return Err(GestureError::AngleOutOfRange {
                    group: self.name.clone(),
                    frame: i,
                    angle: f.angle_degrees,
                });
            }
            if f.duration_ms == 0 {
                return Err(GestureError::ZeroDuration {
                    group: self.name.clone(),
                    frame: i,
                });
            }
        }
        Ok(())
    }

    /// Sum of frame durations, not counting any return moves execution would append.
    pub fn scripted_duration_ms(&self) -> u64 {
        self.frames.iter().map(|f| u64::from(f.duration_ms)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutedFrame {
    pub start_ms: u64,
    pub servo_id: u8,
    pub angle_degrees: f64,
    pub duration_ms: u32,
    /// Whether execution appended this move to return the servo home.
    pub return_move: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GestureTrace {
    pub name: String,
    pub frames: Vec<ExecutedFrame>,
    pub final_pose: Pose,
    pub total_duration_ms: u64,
}

/// Runs a group from its home pose, appending return moves for any servo
/// left away from home.
pub fn execute_gesture(group: &GestureActionGroup) -> Result<GestureTrace, GestureError> {
    group.validate()?;
    let mut pose = group.home_pose;
    let mut clock = 0u64;
    let mut frames = Vec::with_capacity(group.frames.len());
    for f in &group.frames {
        frames.push(ExecutedFrame {
            start_ms: clock,
            servo_id: f.servo_id,
            angle_degrees: f.angle_degrees,
            duration_ms: f.duration_ms,
            return_move: false,
        });
        pose[usize::from(f.servo_id - 1)] = f.angle_degrees;
        clock += u64::from(f.duration_ms);
    }
    for (i, home) in group.home_pose.iter().enumerate() {
        if pose[i] != *home {
            frames.push(ExecutedFrame {
                start_ms: clock,
                servo_id: i as u8 + 1,
                angle_degrees: *home,
                duration_ms: RETURN_MOVE_MS,
                return_move: true,
            });
            pose[i] = *home;
            clock += u64::from(RETURN_MOVE_MS);
        }
    }
    Ok(GestureTrace {
        name: group.name.clone(),
        frames,
        final_pose: pose,
        total_duration_ms: clock,
    })
}

/// Named gestures the tutor can perform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GestureLibrary {
    pub schema_version: u32,
    pub groups: Vec<GestureActionGroup>,
}

pub const GREET_WAVE: &str = "greet-wave";
pub const LEAN_INTEREST: &str = "lean-interest";
pub const SAD_SLUMP: &str = "sad-slump";
pub const THUMBS_UP_CHEER: &str = "thumbs-up-cheer";
pub const UNDERSTANDING_NOD: &str = "understanding-nod";
pub const FAREWELL: &str = "farewell";

// Servo map: 1 head pan, 2 head tilt, 3 torso lean, 4-6 left shoulder
// pitch/roll and elbow, 7-9 right shoulder pitch/roll and elbow, 10 right wrist.
const HOME: Pose = [120.0, 120.0, 120.0, 60.0, 120.0, 120.0, 180.0, 120.0, 120.0, 120.0];

fn group(name: &str, frames: &[(u8, f64, u32)]) -> GestureActionGroup {
    GestureActionGroup {
        name: name.to_string(),
        frames: frames.iter().map(|&(id, a, d)| ServoFrame::new(id, a, d)).collect(),
        home_pose: HOME,
    }
}

impl GestureLibrary {
    /// The six shipped gestures. Each script already ends at the home pose.
    pub fn builtin() -> Self {
        let groups = vec![
            // Right arm up, wave side to side, back down.
            group(
                GREET_WAVE,
                &[
                    (7, 40.0, 700),
                    (9, 60.0, 400),
                    (8, 80.0, 450),
                    (8, 160.0, 450),
                    (8, 80.0, 450),
                    (8, 160.0, 450),
                    (8, 120.0, 400),
                    (9, 120.0, 400),
                    (7, 180.0, 700),
                ],
            ),
            // Both arms forward, lean in, settle back.
            group(
                LEAN_INTEREST,
                &[
                    (4, 110.0, 600),
                    (7, 130.0, 600),
                    (3, 150.0, 800),
                    (2, 135.0, 500),
                    (2, 120.0, 500),
                    (3, 120.0, 800),
                    (4, 60.0, 600),
                    (7, 180.0, 600),
                ],
            ),
            // Head lowers slowly, shoulders slump, then recover.
            group(
                SAD_SLUMP,
                &[
                    (2, 80.0, 1200),
                    (5, 100.0, 900),
                    (8, 140.0, 900),
                    (3, 100.0, 1000),
                    (3, 120.0, 900),
                    (5, 120.0, 700),
                    (8, 120.0, 700),
                    (2, 120.0, 900),
                ],
            ),
            // Right hand thumbs up, left arm cheerful wave, small bounce.
            group(
                THUMBS_UP_CHEER,
                &[
                    (7, 90.0, 500),
                    (10, 200.0, 300),
                    (4, 150.0, 500),
                    (5, 90.0, 350),
                    (5, 150.0, 350),
                    (5, 90.0, 350),
                    (5, 120.0, 350),
                    (3, 135.0, 250),
                    (3, 110.0, 250),
                    (3, 120.0, 250),
                    (4, 60.0, 500),
                    (10, 120.0, 300),
                    (7, 180.0, 500),
                ],
            ),
            // Gentle nod with a hand near the chest, arms lowered softly.
            group(
                UNDERSTANDING_NOD,
                &[
                    (6, 40.0, 600),
                    (4, 100.0, 600),
                    (2, 100.0, 450),
                    (2, 125.0, 450),
                    (2, 100.0, 450),
                    (2, 120.0, 450),
                    (4, 60.0, 800),
                    (6, 120.0, 800),
                ],
            ),
            // Slow wave goodbye with a small bow.
            group(
                FAREWELL,
                &[
                    (3, 140.0, 700),
                    (3, 120.0, 700),
                    (7, 50.0, 700),
                    (8, 90.0, 500),
                    (8, 150.0, 500),
                    (8, 90.0, 500),
                    (8, 120.0, 500),
                    (7, 180.0, 800),
                ],
            ),
        ];
        Self {
            schema_version: LIBRARY_SCHEMA_VERSION,
            groups,
        }
    }

    pub fn get(&self, name: &str) -> Result<&GestureActionGroup, GestureError> {
        self.groups
            .iter()
            .find(|g| g.name == name)
            .ok_or_else(|| GestureError::UnknownGesture(name.to_string()))
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, GestureError> {
        let lib: GestureLibrary = serde_json::from_slice(bytes).map_err(|e| GestureError::Library(e.to_string()))?;
        if lib.schema_version != LIBRARY_SCHEMA_VERSION {
            return Err(GestureError::Library(format!(
                "unsupported schema_version {}",
                lib.schema_version
            )));
        }
        for g in &lib.groups {
            g.validate()?;
        }
        Ok(lib)
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("library serialises");
        out.push(b'\n');
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_group_is_instant_and_home() {
        let g = GestureActionGroup {
            name: "idle".into(),
            frames: vec![],
            home_pose: HOME,
        };
        let t = execute_gesture(&g).unwrap();
        assert_eq!(t.total_duration_ms, 0);
        assert_eq!(t.final_pose, HOME);
        assert!(t.frames.is_empty());
    }

    #[test]
    fn thumbs_up_returns_home_with_scripted_duration() {
        let lib = GestureLibrary::builtin();
        let g = lib.get(THUMBS_UP_CHEER).unwrap();
        let expected: u64 = [500, 300, 500, 350, 350, 350, 350, 250, 250, 250, 500, 300, 500]
            .iter()
            .sum();
        let t = execute_gesture(g).unwrap();
        assert_eq!(t.final_pose, g.home_pose);
        assert_eq!(t.total_duration_ms, expected);
        assert!(t.frames.iter().all(|f| !f.return_move));
    }

    #[test]
    fn builtins_end_home_without_appended_moves() {
        let lib = GestureLibrary::builtin();
        assert_eq!(lib.groups.len(), 6);
        for g in &lib.groups {
            let t = execute_gesture(g).unwrap();
            assert_eq!(t.final_pose, g.home_pose, "{}", g.name);
            assert_eq!(t.total_duration_ms, g.scripted_duration_ms(), "{}", g.name);
        }
    }

    #[test]
    fn appends_return_moves() {
        let g = GestureActionGroup {
            name: "raise".into(),
            frames: vec![ServoFrame::new(4, 200.0, 500), ServoFrame::new(9, 10.0, 250)],
            home_pose: HOME,
        };
        let t = execute_gesture(&g).unwrap();
        assert_eq!(t.final_pose, HOME);
        assert_eq!(t.frames.len(), 4);
        assert_eq!(t.total_duration_ms, 750 + 2 * u64::from(RETURN_MOVE_MS));
        let returns: Vec<u8> = t.frames.iter().filter(|f| f.return_move).map(|f| f.servo_id).collect();
        assert_eq!(returns, vec![4, 9]);
    }

    #[test]
    fn rejects_bad_frames() {
        let mut g = GestureActionGroup {
            name: "bad".into(),
            frames: vec![ServoFrame::new(3, 300.0, 100)],
            home_pose: HOME,
        };
        assert!(matches!(execute_gesture(&g), Err(GestureError::AngleOutOfRange { .. })));
        g.frames = vec![ServoFrame::new(11, 100.0, 100)];
        assert!(matches!(
            execute_gesture(&g),
            Err(GestureError::UnknownServo { servo_id: 11, .. })
        ));
        g.frames = vec![ServoFrame::new(0, 100.0, 100)];
        assert!(matches!(
            execute_gesture(&g),
            Err(GestureError::UnknownServo { servo_id: 0, .. })
        ));
        g.frames = vec![ServoFrame::new(1, 100.0, 0)];
        assert!(matches!(execute_gesture(&g), Err(GestureError::ZeroDuration { .. })));
    }

    #[test]
    fn library_json_round_trip() {
        let lib = GestureLibrary::builtin();
        let back = GestureLibrary::from_json(&lib.to_json()).unwrap();
        assert_eq!(back, lib);
        assert!(GestureLibrary::from_json(br#"{"schema_version":2,"groups":[]}"#).is_err());
    }
}
