from calsim.config import Config
from calsim.plugin import Plugin, hook


class CountingPlugin(Plugin):

    @hook('plugin_registered', priority=0)
    def plugin_registered(self,
                          config: Config,
                          name: str,
                          plugin: Plugin,
                          ) -> None:
        if 'plugin_count' not in config.data:
            config.data['plugin_count'] = 0

        config.data['plugin_count'] += 1

    @hook('simulation_finished', priority=0)
    def simulation_finished(self, config: Config, state, log) -> None:
        config.data.setdefault('finished_runs', []).append((log.topic_id, log.strategy.code, len(log)))
