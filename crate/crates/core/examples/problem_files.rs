//! Writing a problem file, reading it back, and certifying it, the same path
//! the command-line tool takes.

use chancert::certifier::certify_objective;
use chancert::io::{to_json_string, CertificateOutput, ChannelFile, Dims, ObjectiveFile, ProblemFile, SCHEMA_VERSION};
use chancert::linalg::Tolerances;
use chancert::oracle::RandomSource;

fn main() -> chancert::Result<()> {
    let tol = Tolerances::default();
    let mut src = RandomSource::new(5);
    let rho = src.bipartite_density((2, 1));
    let file = ProblemFile {
        version: SCHEMA_VERSION.into(),
        dims: Dims { d_x: 2, d_y: 2, d_z: 1 },
        objective: ObjectiveFile::TraceDistance { rho: rho.op().into(), sigma: (&src.density(2)).into() },
        channel: Some(ChannelFile::Choi(src.channel(2, 2, 2).op().into())),
        tolerances: None,
    };
    let text = to_json_string(&file, 0)?;
    println!("{} bytes of JSON", text.len());

    let problem = ProblemFile::from_json(&text)?.build(&tol)?;
    let channel = problem.channel.as_ref().expect("file has a channel");
    let (sub, cert) = certify_objective(&problem.spec, channel, &tol)?;
    println!("{}", to_json_string(&CertificateOutput::new(problem.family, &sub, &cert), 2)?);
    Ok(())
}
