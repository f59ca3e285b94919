from pathlib import Path

import toml

from oai_quench_tool.exceptions import ConfigError


class Config:
    """
    配置文件类
    """

    def __init__(self, path):
        self.path = Path(path)
        try:
            self.conf = toml.load(self.path)
        except FileNotFoundError:
            raise ConfigError(f"The config file {self.path} doesn't exist!")
        except toml.TomlDecodeError as e:
            raise ConfigError(f'The config file {self.path} is not valid TOML: {e}')

    def get_conf(self, properties):
        """
        获取整个配置文件

        Parameters
        ----------
        properties : str
            字段

        Returns
        -------
        dict
        """
        return self.conf.get(properties, {})

    def get_protocol_conf(self, properties, default=None):
        """
        获取 protocol 下的配置

        Parameters
        ----------
        properties : str
            字段
        default : Any, optional

        Returns
        -------
        Any
        """
        return self.get_conf('protocol').get(properties, default)

    def get_zeta_conf(self):
        """
        获取 protocol.zeta 下的配置

        Returns
        -------
        dict
        """
        return self.get_protocol_conf('zeta', {})

    def get_numerics_conf(self, properties, default=None):
        """
        获取 numerics 下的配置 (eta, check_every, modes)
        """
        return self.get_conf('numerics').get(properties, default)

    def get_file_path(self, properties):
        """
        获取文件路径

        Parameters
        ----------
        properties : str
            字段

        Returns
        -------
        Path
        """
        return Path(self.get_conf('file_path').get(properties, '.'))

    def get_database_config(self):
        """
        获取database下的配置

        Returns
        -------
        dict
        """
        return self.get_conf('database')


CONFIG_FILE_PATH = Path.cwd().joinpath('config.toml')
if not CONFIG_FILE_PATH.exists():
    CONFIG_FILE_PATH = Path(__file__).parent.parent.joinpath('config.toml')

config = Config(CONFIG_FILE_PATH)
