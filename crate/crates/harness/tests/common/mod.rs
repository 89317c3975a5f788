use rissac::RunConfig;

/// CI scenario shrunk to a few seconds of work.
pub fn tiny_config() -> RunConfig {
    let mut cfg = RunConfig::ci();
    cfg.env.episodes = 3;
    cfg.env.steps_per_episode = 10;
    cfg.sac.hidden = vec![8, 8];
    cfg.sac.warmup = 16;
    cfg.sac.batch_size = 8;
    cfg.realizations = 2;
    cfg.ra_trials = 20;
    cfg.r_min_grid = vec![0.0, 1.0, 100.0];
    cfg
}
