// On-screen help and status overlay.

const BINDINGS: Array<[string, string]> = [
  ['drag', 'look around'],
  ['W A S D / Q Z', 'move'],
  ['click', 'select node or community'],
  ['E', 'expand network, or expand selected community'],
  ['P', 'project selected community'],
  ['R', 'reset selected community'],
  ['H', 'highlight selected node'],
  ['C', 'highlight selected community'],
  ['X', 'clear highlight'],
  ['G', 'reload graph'],
];

export interface Legend {
  setStatus(text: string): void;
  setSelection(text: string): void;
}

export function mountLegend(parent: HTMLElement): Legend {
  const box = document.createElement('div');
  box.style.cssText =
    'position:fixed;top:12px;left:12px;padding:10px 14px;' +
    'background:rgba(0,0,0,0.65);color:#ddd;font:12px monospace;' +
    'border-radius:6px;pointer-events:none;white-space:pre;z-index:10;';

  const status = document.createElement('div');
  status.style.cssText = 'color:#8cf;margin-bottom:6px;';
  status.textContent = 'connecting';
  box.appendChild(status);

  const selection = document.createElement('div');
  selection.style.cssText = 'color:#fc8;margin-bottom:6px;';
  selection.textContent = 'nothing selected';
  box.appendChild(selection);

  for (const [key, what] of BINDINGS) {
    const row = document.createElement('div');
    row.textContent = `${key.padEnd(16)} ${what}`;
    box.appendChild(row);
  }
  parent.appendChild(box);

  return {
    setStatus: (text) => {
      status.textContent = text;
    },
    setSelection: (text) => {
      selection.textContent = text;
    },
  };
}
