import { ApiClient } from '../src/api.js';
import { Explorer, ViewState } from '../src/state.js';
import { SceneVM } from '../src/viewmodel.js';
import { Bundle, ReplayServer } from './replay.js';

export interface Harness {
  explorer: Explorer;
  server: ReplayServer;
  scenes: SceneVM[];
  states: ViewState[];
  errors: string[];
  notices: string[];
}

// Explorer wired to the replay server, with every callback recorded.
export function harness(bundle: Bundle): Harness {
  const server = new ReplayServer(bundle);
  const scenes: SceneVM[] = [];
  const states: ViewState[] = [];
  const errors: string[] = [];
  const notices: string[] = [];
  const explorer = new Explorer(new ApiClient('', server.http), {
    onRender: (scene, state) => {
      scenes.push(scene);
      states.push({ ...state });
    },
    onError: (message) => errors.push(message),
    onNotice: (message) => notices.push(message),
  });
  return { explorer, server, scenes, states, errors, notices };
}

export function lastOf<T>(items: T[]): T {
  if (items.length === 0) throw new Error('nothing recorded yet');
  return items[items.length - 1] as T;
}
