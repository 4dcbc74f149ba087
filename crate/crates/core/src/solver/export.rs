use std::io::{self, Write};

use super::{FrontFixedState, Trajectory};

/// `t,g,h,sup_u,sup_v,ux_h,vx_h,hprime`, one row per record.
pub fn write_trajectory_csv<W: Write>(mut out: W, trajectory: &Trajectory) -> io::Result<()> {
    writeln!(out, "t,g,h,sup_u,sup_v,ux_h,vx_h,hprime")?;
    for r in &trajectory.records {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.t, r.g, r.h, r.sup_u, r.sup_v, r.ux_h, r.vx_h, r.hprime
        )?;
    }
    Ok(())
}

/// `t,y,x,u,v`, one row per node of every snapshot.
pub fn write_snapshots_csv<W: Write>(mut out: W, snapshots: &[FrontFixedState]) -> io::Result<()> {
    writeln!(out, "t,y,x,u,v")?;
    for s in snapshots {
        for i in 0..=s.n_cells() {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                s.t,
                s.y(i),
                s.x(i),
                s.u[i],
                s.v[i]
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_rows_map_to_physical_x() {
        let state = FrontFixedState {
            t: 0.5,
            g: -1.0,
            h: 3.0,
            u: vec![0.0, 1.0, 0.0],
            v: vec![0.0, 0.5, 0.0],
        };
        let mut buf = Vec::new();
        write_snapshots_csv(&mut buf, &[state]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,y,x,u,v");
        assert_eq!(lines.len(), 4);
        let mid: Vec<f64> = lines[2].split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(mid, vec![0.5, 0.5, 1.0, 1.0, 0.5]);
    }
}
