"""
运行清单 manifest.json: 版本, 解析后的完整配置, 每个 CSV 的 sha256 与耗时
"""
import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from oai_quench_tool import __version__

MANIFEST_NAME = 'manifest.json'


def sha256_of(path):
    digest = hashlib.sha256()
    with Path(path).open('rb') as f:
        for block in iter(lambda: f.read(1 << 16), b''):
            digest.update(block)
    return digest.hexdigest()


@dataclass
class RunManifest:
    config: dict
    version: str = __version__
    checksums: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    def add_file(self, path, out_dir):
        """
        记录 path 相对 out_dir 的校验和
        """
        path = Path(path)
        self.checksums[path.relative_to(out_dir).as_posix()] = sha256_of(path)

    def write(self, out_dir):
        path = Path(out_dir).joinpath(MANIFEST_NAME)
        path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True, default=str) + '\n',
                        encoding='utf-8')
        return path

    @classmethod
    def load(cls, out_dir):
        data = json.loads(Path(out_dir).joinpath(MANIFEST_NAME).read_text(encoding='utf-8'))
        return cls(**data)

    def verify(self, out_dir):
        """
        重新计算校验和

        Returns
        -------
        list[str]
            缺失或校验和不符的文件; 为空表示全部一致
        """
        mismatched = []
        for name, checksum in sorted(self.checksums.items()):
            path = Path(out_dir).joinpath(name)
            if not path.is_file() or sha256_of(path) != checksum:
                mismatched.append(name)
        return mismatched
