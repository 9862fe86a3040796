//! Static grid map, action kinematics and collision resolution.
//!
//! Cells are addressed by integer `(x, y)` with `x` growing to the right and
//! `y` growing upwards. The map text format lists the top row (`y = height - 1`)
//! first:
//!
//! | glyph | meaning |
//! |-------|---------|
//! | `#` | wall |
//! | `.` | free |
//! | `G` | gate (NLOS to LOS opening) |
//! | `D` | GPS-denied |
//! | `T` | target (cell is free) |
//! | `1`..`9` | agent start (cell is free) |
//!
//! The LOS region is the 4-connected component holding the target, grown
//! through every cell that is neither a wall nor a gate, plus the gates on
//! its border: a doorway sees into the room it opens.

use std::collections::VecDeque;
use std::fmt;
use std::fs;
use std::path::Path;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, MapError};

const BUNDLED_MAP: &str = include_str!("../maps/default.map");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub x: i32,
    pub y: i32,
}

impl Cell {
    pub const fn new(x: i32, y: i32) -> Self {
        Cell { x, y }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellKind {
    Free,
    Wall,
    Gate,
    GpsDenied,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    Up,
    Down,
    Left,
    Right,
    Hover,
}

impl Action {
    pub const ALL: [Action; 5] = [
        Action::Up,
        Action::Down,
        Action::Left,
        Action::Right,
        Action::Hover,
    ];
    pub const COUNT: usize = 5;

    /// Displacement in cells.
    pub const fn delta(self) -> (i32, i32) {
        match self {
            Action::Up => (0, 1),
            Action::Down => (0, -1),
            Action::Left => (-1, 0),
            Action::Right => (1, 0),
            Action::Hover => (0, 0),
        }
    }

    /// Displacement vector in meters for cell size `delta`.
    pub fn displacement(self, delta: f64) -> Vector2<f64> {
        let (dx, dy) = self.delta();
        Vector2::new(dx as f64 * delta, dy as f64 * delta)
    }

    pub const fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Action> {
        Action::ALL.get(i).copied()
    }

    pub const fn is_move(self) -> bool {
        !matches!(self, Action::Hover)
    }

    pub const fn name(self) -> &'static str {
        match self {
            Action::Up => "up",
            Action::Down => "down",
            Action::Left => "left",
            Action::Right => "right",
            Action::Hover => "hover",
        }
    }
}

/// External and internal state of one agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub pos: Cell,
    /// Remaining battery, energy units.
    pub battery: f64,
    /// Elapsed mission time, steps.
    pub elapsed: u32,
}

impl AgentState {
    pub fn new(pos: Cell, battery: f64) -> Self {
        AgentState {
            pos,
            battery,
            elapsed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CollisionKind {
    None,
    Wall,
    Agent,
    TargetProximity,
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionOutcome {
    pub next_pos: Cell,
    pub collided: bool,
    pub collision_kind: CollisionKind,
}

impl TransitionOutcome {
    fn moved(next_pos: Cell) -> Self {
        TransitionOutcome {
            next_pos,
            collided: false,
            collision_kind: CollisionKind::None,
        }
    }

    fn blocked(pos: Cell, kind: CollisionKind) -> Self {
        TransitionOutcome {
            next_pos: pos,
            collided: true,
            collision_kind: kind,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CellClass {
    pub is_gate: bool,
    pub is_gps_denied: bool,
    pub is_los: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMap {
    width: usize,
    height: usize,
    cell_size: f64,
    kinds: Vec<CellKind>,
    los: Vec<bool>,
    target: Cell,
    agent_starts: Vec<Cell>,
}

impl GridMap {
    /// Builds a map from raw parts, checking every invariant and deriving the
    /// LOS region. `kinds` is row-major with `y = 0` first.
    pub fn from_parts(
        width: usize,
        height: usize,
        cell_size: f64,
        kinds: Vec<CellKind>,
        target: Cell,
        agent_starts: Vec<Cell>,
    ) -> Result<Self, MapError> {
        if width == 0 || height == 0 || kinds.len() != width * height {
            return Err(MapError::Empty);
        }
        let mut map = GridMap {
            width,
            height,
            cell_size,
            kinds,
            los: Vec::new(),
            target,
            agent_starts,
        };
        map.check_bounds(target)?;
        if map.kind(target) != CellKind::Free {
            return Err(MapError::TargetBlocked {
                x: target.x,
                y: target.y,
            });
        }
        for (i, &start) in map.agent_starts.iter().enumerate() {
            map.check_bounds(start)?;
            if map.kind(start) != CellKind::Free || start == target {
                return Err(MapError::AgentStartBlocked {
                    x: start.x,
                    y: start.y,
                });
            }
            if map.agent_starts[..i].contains(&start) {
                return Err(MapError::DuplicateAgent(i as u8 + 1));
            }
        }
        map.los = map.flood_los();
        Ok(map)
    }

    /// Parses the text map format with a 1 m cell size.
    pub fn parse(text: &str) -> Result<Self, MapError> {
        let rows: Vec<&str> = text
            .lines()
            .map(|l| l.trim_end_matches('\r'))
            .filter(|l| !l.is_empty())
            .collect();
        if rows.is_empty() {
            return Err(MapError::Empty);
        }
        let width = rows[0].chars().count();
        let height = rows.len();
        let mut kinds = vec![CellKind::Free; width * height];
        let mut targets = Vec::new();
        let mut starts: Vec<Option<Cell>> = vec![None; 9];

        for (row, line) in rows.iter().enumerate() {
            let found = line.chars().count();
            if found != width {
                return Err(MapError::NotRectangular {
                    row,
                    expected: width,
                    found,
                });
            }
            let y = (height - 1 - row) as i32;
            for (col, glyph) in line.chars().enumerate() {
                let cell = Cell::new(col as i32, y);
                let kind = match glyph {
                    '#' => CellKind::Wall,
                    '.' => CellKind::Free,
                    'G' => CellKind::Gate,
                    'D' => CellKind::GpsDenied,
                    'T' => {
                        targets.push(cell);
                        CellKind::Free
                    }
                    '1'..='9' => {
                        let n = glyph as u8 - b'0';
                        let slot = &mut starts[n as usize - 1];
                        if slot.is_some() {
                            return Err(MapError::DuplicateAgent(n));
                        }
                        *slot = Some(cell);
                        CellKind::Free
                    }
                    other => {
                        return Err(MapError::UnknownGlyph {
                            row,
                            col,
                            glyph: other,
                        })
                    }
                };
                kinds[y as usize * width + col] = kind;
            }
        }
        if targets.len() != 1 {
            return Err(MapError::TargetCount(targets.len()));
        }
        let count = starts
            .iter()
            .rposition(Option::is_some)
            .map_or(0, |i| i + 1);
        let mut agent_starts = Vec::with_capacity(count);
        for (i, s) in starts[..count].iter().enumerate() {
            agent_starts.push(s.ok_or(MapError::MissingAgent(i as u8 + 1))?);
        }
        GridMap::from_parts(width, height, 1.0, kinds, targets[0], agent_starts)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, Error> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(GridMap::parse(&text)?)
    }

    /// The 36 x 24 office layout shipped with the crate.
    pub fn bundled() -> Self {
        GridMap::parse(BUNDLED_MAP).expect("bundled map is valid")
    }

    pub fn bundled_text() -> &'static str {
        BUNDLED_MAP
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn n_cells(&self) -> usize {
        self.width * self.height
    }

    pub fn target(&self) -> Cell {
        self.target
    }

    pub fn agent_starts(&self) -> &[Cell] {
        &self.agent_starts
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.x >= 0 && c.y >= 0 && (c.x as usize) < self.width && (c.y as usize) < self.height
    }

    fn check_bounds(&self, c: Cell) -> Result<(), MapError> {
        if self.in_bounds(c) {
            Ok(())
        } else {
            Err(MapError::OutOfBounds {
                x: c.x,
                y: c.y,
                width: self.width,
                height: self.height,
            })
        }
    }

    /// Row-major state index. Panics on out-of-bounds cells.
    pub fn index(&self, c: Cell) -> usize {
        debug_assert!(self.in_bounds(c), "cell {c} out of bounds");
        c.y as usize * self.width + c.x as usize
    }

    pub fn cell_at(&self, index: usize) -> Cell {
        Cell::new((index % self.width) as i32, (index / self.width) as i32)
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.n_cells()).map(|i| self.cell_at(i))
    }

    pub fn kind(&self, c: Cell) -> CellKind {
        self.kinds[self.index(c)]
    }

    pub fn is_wall(&self, c: Cell) -> bool {
        self.kind(c) == CellKind::Wall
    }

    pub fn is_gate(&self, c: Cell) -> bool {
        self.kind(c) == CellKind::Gate
    }

    pub fn is_gps_denied(&self, c: Cell) -> bool {
        self.kind(c) == CellKind::GpsDenied
    }

    pub fn is_los(&self, c: Cell) -> bool {
        self.los[self.index(c)]
    }

    pub fn classify(&self, c: Cell) -> CellClass {
        CellClass {
            is_gate: self.is_gate(c),
            is_gps_denied: self.is_gps_denied(c),
            is_los: self.is_los(c),
        }
    }

    /// Cell center in meters.
    pub fn position(&self, c: Cell) -> Vector2<f64> {
        Vector2::new(c.x as f64 * self.cell_size, c.y as f64 * self.cell_size)
    }

    pub fn distance_m(&self, a: Cell, b: Cell) -> f64 {
        (self.position(a) - self.position(b)).norm()
    }

    /// Largest Manhattan distance between two cells of the grid.
    pub fn d_max(&self) -> u32 {
        (self.width - 1 + self.height - 1) as u32
    }

    /// Geometric successor of `pos` under `a`, clamped to the grid and
    /// ignoring walls and agents.
    pub fn predicted_next(&self, pos: Cell, a: Action) -> Cell {
        let (dx, dy) = a.delta();
        Cell::new(
            (pos.x + dx).clamp(0, self.width as i32 - 1),
            (pos.y + dy).clamp(0, self.height as i32 - 1),
        )
    }

    /// Realized transition of one agent. `occupied` holds the cells of the
    /// other agents at the moment this agent moves.
    pub fn step_agent(
        &self,
        occupied: &[Cell],
        state: &AgentState,
        a: Action,
        d_safe: f64,
    ) -> TransitionOutcome {
        if !a.is_move() {
            return TransitionOutcome::moved(state.pos);
        }
        let (dx, dy) = a.delta();
        let raw = Cell::new(state.pos.x + dx, state.pos.y + dy);
        if !self.in_bounds(raw) {
            return TransitionOutcome::blocked(state.pos, CollisionKind::Boundary);
        }
        if self.is_wall(raw) {
            return TransitionOutcome::blocked(state.pos, CollisionKind::Wall);
        }
        if occupied.contains(&raw) {
            return TransitionOutcome::blocked(state.pos, CollisionKind::Agent);
        }
        if self.distance_m(raw, self.target) <= d_safe {
            return TransitionOutcome::blocked(state.pos, CollisionKind::TargetProximity);
        }
        TransitionOutcome::moved(raw)
    }

    fn flood_los(&self) -> Vec<bool> {
        let mut los = vec![false; self.n_cells()];
        let mut queue = VecDeque::from([self.target]);
        los[self.index(self.target)] = true;
        let mut doors = Vec::new();
        while let Some(c) = queue.pop_front() {
            for a in &Action::ALL[..4] {
                let (dx, dy) = a.delta();
                let n = Cell::new(c.x + dx, c.y + dy);
                if !self.in_bounds(n) {
                    continue;
                }
                let i = self.index(n);
                match self.kinds[i] {
                    CellKind::Wall => {}
                    CellKind::Gate => doors.push(i),
                    _ if !los[i] => {
                        los[i] = true;
                        queue.push_back(n);
                    }
                    _ => {}
                }
            }
        }
        for i in doors {
            los[i] = true;
        }
        los
    }

    /// Renders the map back into the text format.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity((self.width + 1) * self.height);
        for y in (0..self.height as i32).rev() {
            for x in 0..self.width as i32 {
                let c = Cell::new(x, y);
                let glyph = if c == self.target {
                    'T'
                } else if let Some(i) = self.agent_starts.iter().position(|&s| s == c) {
                    char::from(b'1' + i as u8)
                } else {
                    match self.kind(c) {
                        CellKind::Free => '.',
                        CellKind::Wall => '#',
                        CellKind::Gate => 'G',
                        CellKind::GpsDenied => 'D',
                    }
                };
                out.push(glyph);
            }
            out.push('\n');
        }
        out
    }
}

pub fn manhattan(a: Cell, b: Cell) -> u32 {
    a.x.abs_diff(b.x) + a.y.abs_diff(b.y)
}
